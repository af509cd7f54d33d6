#include <cstdint>
#include <cstdlib>
#include <string_view>

#include "texhtml/pipeline.hpp"

extern "C" int LLVMFuzzerTestOneInput(const std::uint8_t* data, std::size_t size) {
  static const texhtml::PackageRegistry registry = texhtml::PackageRegistry::with_defaults();
  texhtml::ConvertOptions options;
  options.fuel = 20'000;
  options.max_tokens = 200'000;
  const std::string_view source(reinterpret_cast<const char*>(data), size);
  const texhtml::ConversionResult r = texhtml::convert_source(source, "fuzz", registry, options);
  if (r.html.has_value() != (r.status != texhtml::ConversionStatus::failed)) std::abort();
  return 0;
}
