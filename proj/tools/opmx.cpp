#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opmx/gallery.hpp"
#include "opmx/suite.hpp"

namespace {

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (part.empty() || used != part.size() || part[0] == '-' || v < 1)
      throw opmx::Error(opmx::ErrorKind::InvalidInput, "truncation: \"" + part + "\" is not a size >= 1");
    out.push_back(static_cast<std::size_t>(v));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replay operator-matrix constructions and emit verification reports"};
  std::vector<std::string> cases;
  std::string truncation = "64";
  std::string format = "json";
  std::string export_name;
  opmx::SuiteConfig cfg;
  bool list = false;

  app.add_option("--case", cases, "Gallery case name, or all")->expected(1, -1);
  app.add_option("--truncation", truncation, "Truncation sizes, comma separated");
  app.add_option("--tol", cfg.tol, "Tolerance for floating-point checks");
  app.add_option("--samples", cfg.samples, "Samples per sampled check");
  auto* seed_opt = app.add_option("--seed", cfg.seed, "Random seed (default 42, or OPMX_SEED)");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--define", cfg.define_paths, "Operator/matrix definition file");
  app.add_option("--expect", cfg.expect_path, "Expected verdicts: {case: {check: verdict}}");
  app.add_flag("--list", list, "List gallery cases and exit");
  app.add_option("--export", export_name, "Print a gallery case as a definition file and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list) {
      for (const auto& c : opmx::list_cases()) {
        std::cout << c.name << ": " << c.label << "\n";
        for (const auto& [check, v] : c.expected) std::cout << "  " << check << " -> " << opmx::to_string(v) << "\n";
      }
      return 0;
    }
    if (!export_name.empty()) {
      std::cout << opmx::export_case(opmx::build_case(export_name)).dump(2) << "\n";
      return 0;
    }
    cfg.truncations = parse_sizes(truncation);
    if (seed_opt->count() == 0) {
      if (const char* env = std::getenv("OPMX_SEED")) {
        try {
          std::size_t used = 0;
          const std::string s(env);
          cfg.seed = std::stoull(s, &used);
          if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
          throw opmx::Error(opmx::ErrorKind::InvalidInput, "OPMX_SEED: not an unsigned integer");
        }
      }
    }
  } catch (const opmx::Error& e) {
    std::cerr << "opmx: " << e.what() << "\n";
    return 2;
  }
  cfg.format = format == "text" ? opmx::OutputFormat::Text : opmx::OutputFormat::Json;
  cfg.cases = cases;
  if (cfg.cases.empty() && cfg.define_paths.empty()) cfg.cases = {"all"};
  return opmx::run_suite(cfg, std::cout, std::cerr);
}
