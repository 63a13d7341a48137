#pragma once

// Suite runner behind the command-line tool: replays gallery cases and user
// definitions at each truncation and streams one report per check.

#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "opmx/gallery.hpp"
#include "opmx/io.hpp"

namespace opmx {

enum class OutputFormat { Json, Text };

struct SuiteConfig {
  std::vector<std::string> cases;  // gallery names or "all"
  std::vector<std::size_t> truncations{64};
  double tol = 1e-10;
  std::size_t samples = 100;
  std::uint64_t seed = 42;
  OutputFormat format = OutputFormat::Json;
  std::vector<std::string> define_paths;
  std::string expect_path;  // optional override of expected verdicts
};

namespace suite_detail {

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, path + ": cannot open");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

inline CheckVerdict decode_verdict(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) io::detail::bad(path, "expected \"pass\", \"fail\" or \"undecided\"");
  try {
    return parse_check_verdict(j.get<std::string>());
  } catch (const Error&) {
    io::detail::bad(path, "expected \"pass\", \"fail\" or \"undecided\", got \"" + j.get<std::string>() + "\"");
  }
}

inline void apply_expectations(GalleryCase& c, const nlohmann::json& expected, const std::string& path) {
  if (!expected.is_object()) io::detail::bad(path, "expected an object of check -> verdict");
  for (const auto& [check, v] : expected.items()) {
    auto it = std::find_if(c.checks.begin(), c.checks.end(), [&](const GalleryCheck& g) { return g.name == check; });
    if (it == c.checks.end()) io::detail::bad(path + "." + check, "case " + c.name + " has no such check");
    it->expected = decode_verdict(v, path + "." + check);
  }
}

}  // namespace suite_detail

/// Replays a definition file: pairing against the formal adjoint, compression transpose,
/// and a denseness check on every block of the formal adjoint's domain.
inline GalleryCase case_from_definition(const nlohmann::json& j, const std::string& path = "$") {
  if (!j.is_object()) io::detail::bad(path, "expected an object");
  std::string name = "defined";
  if (j.contains("name")) {
    if (!j["name"].is_string()) io::detail::bad(path + ".name", "expected a string");
    name = j["name"].get<std::string>();
  }
  CompositeKind kind = CompositeKind::Matrix;
  if (j.contains("kind")) {
    const std::string k = j["kind"].is_string() ? j["kind"].get<std::string>() : "";
    if (k == "row") {
      kind = CompositeKind::Row;
    } else if (k == "col") {
      kind = CompositeKind::Col;
    } else if (k != "matrix") {
      io::detail::bad(path + ".kind", "expected \"row\", \"col\" or \"matrix\"");
    }
  }
  const OpMatrix m = io::decode_matrix(j, path);
  Composite comp = m;
  try {
    comp = assemble(kind, m.grid());
  } catch (const Error& e) {
    io::detail::bad(path + ".grid", io::detail::reason(e));
  }
  GalleryCase c{name, "user definition", "replayed from JSON", kind, m, {}};
  c.checks.push_back(gallery::pairing_check(m));
  c.checks.push_back(gallery::transpose_check(comp));
  for (std::size_t b = 0; b < m.rows(); ++b) c.checks.push_back(gallery::adjoint_denseness_check(comp, b, CheckVerdict::Undecided));
  if (j.contains("expected")) suite_detail::apply_expectations(c, j["expected"], path + ".expected");
  return c;
}

/// One check's report with run context; errors become undecided reports.
inline nlohmann::json run_check(const GalleryCheck& ch, std::optional<CheckVerdict> expected, const std::string& case_name,
                                const RunParams& p) {
  VerificationReport r;
  try {
    r = ch.run(p);
  } catch (const Error& e) {
    r = VerificationReport{ch.name};
    r.verdict = CheckVerdict::Undecided;
    r.certificate = {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
  }
  r.check = ch.name;
  r.expected = expected;
  nlohmann::json j = r.to_json();
  j["case"] = case_name;
  j["truncation"] = p.truncation;
  return j;
}

struct SuiteJob {
  GalleryCase gcase;
  std::vector<std::optional<CheckVerdict>> expected;  // per check
};

inline std::string render_text(const nlohmann::json& j) {
  std::ostringstream os;
  os << j["case"].get<std::string>() << " N=" << j["truncation"].get<std::size_t>() << " " << j["check"].get<std::string>() << ": "
     << j["verdict"].get<std::string>();
  if (!j["expected"].is_null()) os << " (expected " << j["expected"].get<std::string>() << ")";
  os << (j["match"].get<bool>() ? " ok" : " MISMATCH");
  return os.str();
}

/// Exit code 0 when every report matches, 1 on any mismatch, 2 on invalid input.
inline int run_suite(const SuiteConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<SuiteJob> jobs;
  try {
    if (cfg.truncations.empty()) throw Error(ErrorKind::InvalidInput, "truncation: at least one size is required");
    for (auto n : cfg.truncations)
      if (n < 1) throw Error(ErrorKind::InvalidInput, "truncation: sizes must be >= 1");
    if (!(cfg.tol > 0)) throw Error(ErrorKind::InvalidInput, "tol: must be > 0");
    if (cfg.samples < 1) throw Error(ErrorKind::InvalidInput, "samples: must be >= 1");

    std::vector<std::string> names;
    for (const auto& n : cfg.cases) {
      if (n == "all") {
        names.insert(names.end(), case_names().begin(), case_names().end());
      } else {
        names.push_back(n);
      }
    }
    for (const auto& n : names) {
      GalleryCase c = build_case(n);
      std::vector<std::optional<CheckVerdict>> ex;
      for (const auto& ch : c.checks) ex.emplace_back(ch.expected);
      jobs.push_back({std::move(c), std::move(ex)});
    }
    for (const auto& path : cfg.define_paths) {
      const nlohmann::json j = suite_detail::read_json(path);
      GalleryCase c = case_from_definition(j, path);
      std::vector<std::optional<CheckVerdict>> ex;
      const nlohmann::json stated = j.contains("expected") ? j["expected"] : nlohmann::json::object();
      for (const auto& ch : c.checks) ex.emplace_back(stated.contains(ch.name) ? std::optional(ch.expected) : std::nullopt);
      jobs.push_back({std::move(c), std::move(ex)});
    }
    if (!cfg.expect_path.empty()) {
      const nlohmann::json j = suite_detail::read_json(cfg.expect_path);
      if (!j.is_object()) io::detail::bad(cfg.expect_path, "expected an object of case -> {check -> verdict}");
      for (const auto& [cname, checks] : j.items()) {
        auto it = std::find_if(jobs.begin(), jobs.end(), [&](const SuiteJob& s) { return s.gcase.name == cname; });
        if (it == jobs.end()) io::detail::bad(cfg.expect_path + "." + cname, "case is not part of this run");
        suite_detail::apply_expectations(it->gcase, checks, cfg.expect_path + "." + cname);
        for (std::size_t i = 0; i < it->gcase.checks.size(); ++i)
          if (checks.contains(it->gcase.checks[i].name)) it->expected[i] = it->gcase.checks[i].expected;
      }
    }
    if (jobs.empty()) throw Error(ErrorKind::InvalidInput, "case: nothing to run");
  } catch (const Error& e) {
    err << "opmx: " << e.what() << "\n";
    return 2;
  }

  // One task per (case, truncation); output stays in job order.
  std::vector<std::future<std::vector<nlohmann::json>>> pending;
  for (const auto& job : jobs) {
    for (auto n : cfg.truncations) {
      const RunParams p{n, cfg.tol, cfg.samples, cfg.seed};
      pending.push_back(std::async(std::launch::async, [&job, p] {
        std::vector<nlohmann::json> lines;
        for (std::size_t i = 0; i < job.gcase.checks.size(); ++i)
          lines.push_back(run_check(job.gcase.checks[i], job.expected[i], job.gcase.name, p));
        return lines;
      }));
    }
  }
  bool all_match = true;
  for (auto& f : pending) {
    for (const auto& line : f.get()) {
      all_match = all_match && line["match"].get<bool>();
      out << (cfg.format == OutputFormat::Json ? line.dump() : render_text(line)) << "\n";
    }
    out.flush();
  }
  return all_match ? 0 : 1;
}

}  // namespace opmx
