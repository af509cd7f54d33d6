#pragma once

#include <string_view>
#include <vector>

namespace texhtml::detail {

std::vector<std::string_view> core_handler_source();
std::vector<std::string_view> default_handler_sources();
std::vector<std::string_view> default_ignored_packages();

}  // namespace texhtml::detail
