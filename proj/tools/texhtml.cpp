// texhtml: command-line front end.
//
//   texhtml convert <bundle-dir | file.tex> [--out DIR] [--dump-ast FILE]
//   texhtml batch <corpus-dir> --jobs N --cost-per-article X --out report.json
//   texhtml plan --previous report.json --changed-packages a,b
//   texhtml serve --store reports.ndjson --port 8080
//   texhtml packages

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "texhtml/corpus.hpp"
#include "texhtml/issue_intake.hpp"
#include "texhtml/pipeline.hpp"

namespace fs = std::filesystem;
using namespace texhtml;

namespace {

IntakeServer* active_server = nullptr;

void handle_signal(int) {
  if (active_server != nullptr) active_server->stop();
}

PackageRegistry make_registry(const std::vector<std::string>& dirs) {
  PackageRegistry registry = PackageRegistry::with_defaults();
  for (const std::string& dir : dirs) {
    Diagnostics diags;
    registry.load_directory(dir, &diags, true);
    for (const Diagnostic& d : diags) std::cerr << "warning: " << d.message << "\n";
  }
  return registry;
}

void print_diagnostics(const Diagnostics& diags, bool verbose) {
  for (const Diagnostic& d : diags) {
    if (d.severity == Severity::info && !verbose) continue;
    std::cerr << to_string(d.severity) << " [" << to_string(d.stage) << "/" << d.code << "] ";
    // Only the source stages carry real positions.
    if (d.stage == Stage::lexer || d.stage == Stage::expander || d.stage == Stage::parser) {
      std::cerr << d.location.line << ":" << d.location.column << ": ";
    }
    std::cerr << d.message << "\n";
  }
}

bool write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return static_cast<bool>(out);
}

struct ConvertArgs {
  std::string input;
  std::string out_dir;
  std::string paper_id;
  std::string dump_ast;
  std::string chrome_script;
  std::string report_endpoint;
  std::vector<std::string> package_dirs;
  std::uint64_t fuel = default_fuel;
  double timeout_seconds = 30;
  bool verbose = false;
  bool json = false;
};

int run_convert(const ConvertArgs& args) {
  const fs::path input(args.input);
  SourceBundle bundle;
  fs::path out_dir;
  try {
    if (fs::is_directory(input)) {
      bundle = load_bundle(input, args.paper_id.empty() ? std::nullopt : std::optional(args.paper_id));
      out_dir = input;
    } else {
      std::ifstream in(input, std::ios::binary);
      if (!in) {
        std::cerr << "error: cannot read " << input << "\n";
        return 3;
      }
      std::ostringstream buffer;
      buffer << in.rdbuf();
      bundle.paper_id = args.paper_id.empty() ? input.stem().string() : args.paper_id;
      bundle.files.emplace(input.filename().string(), buffer.str());
      bundle.main_file = input.filename().string();
      out_dir = input.parent_path().empty() ? fs::path(".") : input.parent_path();
    }
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  if (!args.out_dir.empty()) out_dir = args.out_dir;

  ConvertOptions options;
  options.fuel = args.fuel;
  options.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(args.timeout_seconds * 1000));
  options.keep_document = !args.dump_ast.empty();
  if (!args.chrome_script.empty()) options.emit.chrome_script = args.chrome_script;
  if (!args.report_endpoint.empty()) options.emit.report_endpoint = args.report_endpoint;

  const PackageRegistry registry = make_registry(args.package_dirs);
  const ConversionResult result = convert(bundle, registry, options);

  print_diagnostics(result.diagnostics, args.verbose);
  std::string html_path;
  if (result.html) {
    fs::create_directories(out_dir);
    const fs::path target = out_dir / (result.paper_id + ".html");
    if (!write_file(target, result.html->html)) {
      std::cerr << "error: cannot write " << target << "\n";
      return 2;
    }
    html_path = target.string();
  }
  if (result.document) {
    const std::string dump = to_json(*result.document).dump(2) + "\n";
    if (args.dump_ast == "-") {
      std::cout << dump;
    } else if (!write_file(args.dump_ast, dump)) {
      std::cerr << "error: cannot write " << args.dump_ast << "\n";
    }
  }
  if (args.json) {
    nlohmann::ordered_json j{{"paperId", result.paper_id},
                             {"status", to_string(result.status)},
                             {"errors", count_severity(result.diagnostics, Severity::error)},
                             {"warnings", count_severity(result.diagnostics, Severity::warning)},
                             {"unknownPackages", result.unknown_packages},
                             {"html", html_path},
                             {"elapsedMs", result.elapsed_ms}};
    std::cout << j.dump() << "\n";
  } else if (args.dump_ast != "-") {
    std::cout << result.paper_id << ": " << to_string(result.status);
    if (result.bundle_invalid) std::cout << " (invalid bundle)";
    if (!html_path.empty()) std::cout << " -> " << html_path;
    std::cout << "\n";
  }
  return exit_code(result);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LaTeX subset to accessible HTML"};
  app.require_subcommand(1);

  ConvertArgs convert_args;
  auto* convert_cmd = app.add_subcommand("convert", "Convert one bundle directory or .tex file");
  convert_cmd->add_option("input", convert_args.input, "Bundle directory or main .tex file")->required();
  convert_cmd->add_option("-o,--out", convert_args.out_dir, "Output directory for <paper-id>.html");
  convert_cmd->add_option("--paper-id", convert_args.paper_id, "Paper id (default: directory or file name)");
  convert_cmd->add_option("--dump-ast", convert_args.dump_ast, "Write the document tree as JSON ('-' for stdout)");
  convert_cmd->add_option("--chrome-script", convert_args.chrome_script, "Reader script URL to reference");
  convert_cmd->add_option("--report-endpoint", convert_args.report_endpoint, "Issue-intake base URL");
  convert_cmd->add_option("--packages", convert_args.package_dirs, "Extra handler directory (*.pkg)")->allow_extra_args(false);
  convert_cmd->add_option("--fuel", convert_args.fuel, "Macro substitution budget")->capture_default_str();
  convert_cmd->add_option("--timeout", convert_args.timeout_seconds, "Seconds per document")->capture_default_str();
  convert_cmd->add_flag("-v,--verbose", convert_args.verbose, "Also print info diagnostics");
  convert_cmd->add_flag("--json", convert_args.json, "Print a JSON summary line");

  std::string corpus_dir;
  std::string report_path;
  std::string text_path;
  std::string cost_text = "0.015";
  int jobs = 4;
  bool no_html = false;
  std::vector<std::string> batch_packages;
  auto* batch_cmd = app.add_subcommand("batch", "Convert every bundle in a corpus directory");
  batch_cmd->add_option("corpus", corpus_dir, "Directory of bundle subdirectories")->required();
  batch_cmd->add_option("-j,--jobs", jobs, "Parallel conversions")->capture_default_str();
  batch_cmd->add_option("--cost-per-article", cost_text, "Dollars per article")->capture_default_str();
  batch_cmd->add_option("--out", report_path, "Machine-readable report (JSON)");
  batch_cmd->add_option("--text", text_path, "Human-readable report (default: stdout)");
  batch_cmd->add_option("--packages", batch_packages, "Extra handler directory (*.pkg)")->allow_extra_args(false);
  batch_cmd->add_flag("--no-html", no_html, "Do not write pages beside the sources");

  std::string previous_path;
  std::string changed;
  std::string version{converter_version};
  auto* plan_cmd = app.add_subcommand("plan", "List papers that need reconversion");
  plan_cmd->add_option("--previous", previous_path, "Earlier batch report (JSON)")->required();
  plan_cmd->add_option("--changed-packages", changed, "Comma-separated package names");
  plan_cmd->add_option("--version", version, "Current converter version")->capture_default_str();

  std::string store_path = "reports.ndjson";
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Run the issue-report HTTP service");
  serve_cmd->add_option("--store", store_path, "Report file (newline-delimited JSON)")->capture_default_str();
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();

  std::vector<std::string> list_packages_dirs;
  auto* packages_cmd = app.add_subcommand("packages", "List known package handlers");
  packages_cmd->add_option("--packages", list_packages_dirs, "Extra handler directory (*.pkg)")->allow_extra_args(false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*convert_cmd) return run_convert(convert_args);

    if (*batch_cmd) {
      const auto cost = Money::parse(cost_text);
      if (!cost) {
        std::cerr << "error: bad --cost-per-article '" << cost_text << "'\n";
        return 2;
      }
      BatchOptions options;
      options.jobs = jobs;
      options.cost_per_article = *cost;
      options.write_html = !no_html;
      const CorpusReport report = run_batch(corpus_dir, make_registry(batch_packages), options);
      if (!report_path.empty() && !write_file(report_path, to_json(report).dump(2) + "\n")) {
        std::cerr << "error: cannot write " << report_path << "\n";
        return 2;
      }
      if (text_path.empty()) {
        std::cout << to_text(report);
      } else if (!write_file(text_path, to_text(report))) {
        std::cerr << "error: cannot write " << text_path << "\n";
        return 2;
      }
      return 0;
    }

    if (*plan_cmd) {
      std::ifstream in(previous_path);
      if (!in) {
        std::cerr << "error: cannot read " << previous_path << "\n";
        return 2;
      }
      const CorpusReport previous = report_from_json(nlohmann::json::parse(in));
      std::set<std::string> packages;
      std::stringstream list(changed);
      for (std::string item; std::getline(list, item, ',');) {
        if (!item.empty()) packages.insert(item);
      }
      for (const std::string& id : plan_reconversion(previous, version, packages)) std::cout << id << "\n";
      return 0;
    }

    if (*serve_cmd) {
      IssueStore store{fs::path(store_path)};
      if (store.skipped_lines() > 0) {
        std::cerr << "warning: skipped " << store.skipped_lines() << " unreadable line(s) in " << store_path << "\n";
      }
      IntakeServer server(store);
      const int bound = server.bind(host, port);
      if (bound < 0) {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return 2;
      }
      active_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cout << "listening on http://" << host << ":" << bound << " (" << store.size() << " reports)\n"
                << std::flush;
      server.listen();
      active_server = nullptr;
      return 0;
    }

    if (*packages_cmd) {
      const PackageRegistry registry = make_registry(list_packages_dirs);
      for (const std::string& name : registry.package_names()) {
        const PackageHandler* h = registry.resolve(name);
        std::cout << name << "\t" << to_string(h->kind) << "\t" << h->macros.size() << " commands\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
