// Runs every reproduction case through the CLI, compares the JSON summaries
// against the checked-in expected values, and writes a markdown report.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CheckResult {
  std::string case_id;
  std::string description;
  double expected = 0.0;
  double actual = 0.0;
  std::string tolerance;
  bool pass = false;
};

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  json j;
  in >> j;
  return j;
}

double lookup(const json& summary, const std::string& key, const std::string& case_id) {
  if (!summary.contains(key))
    throw std::runtime_error(fmt::format("case {}: summary has no key '{}'", case_id, key));
  return summary.at(key).get<double>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reproduction case runner"};
  std::string cli_path = "build/tools/cavpa";
  std::string repro_dir = "repro";
  std::string work_dir = "repro_out";
  std::string report_path;
  app.add_option("--cli", cli_path, "path to the cavpa binary");
  app.add_option("--cases", repro_dir, "directory holding manifest.json and case configs");
  app.add_option("--workdir", work_dir, "directory for case outputs");
  app.add_option("--report", report_path, "markdown report path (default <workdir>/report.md)");
  CLI11_PARSE(app, argc, argv);
  if (report_path.empty()) report_path = (fs::path(work_dir) / "report.md").string();

  try {
    const fs::path cli = fs::absolute(cli_path);
    const fs::path cases_root = fs::absolute(repro_dir);
    const fs::path work = fs::absolute(work_dir);
    fs::create_directories(work);

    const json manifest = load_json(cases_root / "manifest.json");

    std::vector<CheckResult> results;
    std::map<std::string, json> summaries;
    std::ostringstream md;
    md << "# reproduction report\n";

    for (const auto& c : manifest.at("cases")) {
      const std::string id = c.at("id");
      const std::string scenario = c.at("scenario");
      const fs::path config = cases_root / c.at("config").get<std::string>();
      const fs::path summary_file = work / c.at("summary").get<std::string>();

      const std::string cmd =
          fmt::format("cd '{}' && '{}' {} '{}' > '{}.log' 2>&1", work.string(), cli.string(),
                      scenario, config.string(), (work / id).string());
      const int rc = std::system(cmd.c_str());
      md << fmt::format("\n## {} ({}, exit {})\n\n", id, scenario, rc);
      if (rc != 0) {
        CheckResult r{id, "scenario exit status", 0.0, static_cast<double>(rc), "-", false};
        results.push_back(r);
        md << "scenario failed; see the log file\n";
        continue;
      }
      const json summary = load_json(summary_file);
      summaries[id] = summary;

      md << "| quantity | expected | actual | tolerance | status | source |\n";
      md << "|---|---|---|---|---|---|\n";
      for (const auto& chk : c.at("checks")) {
        CheckResult r;
        r.case_id = id;
        r.description = chk.at("key");
        r.expected = chk.at("expected").get<double>();
        r.actual = lookup(summary, chk.at("key"), id);
        if (chk.contains("tol_rel")) {
          const double tol = chk.at("tol_rel").get<double>();
          r.tolerance = fmt::format("rel {:g}", tol);
          r.pass = std::abs(r.actual - r.expected) <= tol * std::abs(r.expected);
        } else if (chk.contains("tol_abs")) {
          const double tol = chk.at("tol_abs").get<double>();
          r.tolerance = fmt::format("abs {:g}", tol);
          r.pass = std::abs(r.actual - r.expected) <= tol;
        } else if (chk.contains("tol_factor")) {
          const double tol = chk.at("tol_factor").get<double>();
          r.tolerance = fmt::format("factor {:g}", tol);
          const double ratio = r.actual / r.expected;
          r.pass = ratio > 0.0 && ratio <= tol && ratio >= 1.0 / tol;
        } else {
          throw std::runtime_error(fmt::format("case {}: check '{}' has no tolerance", id,
                                               r.description));
        }
        results.push_back(r);
        md << fmt::format("| {} | {:.9g} | {:.9g} | {} | {} | {} |\n", r.description, r.expected,
                          r.actual, r.tolerance, r.pass ? "pass" : "FAIL",
                          chk.value("source", ""));
      }
    }

    md << "\n## cross checks\n\n| check | smaller | larger | status | source |\n|---|---|---|---|---|\n";
    for (const auto& chk : manifest.at("cross_checks")) {
      auto resolve = [&](const std::string& ref) {
        const auto colon = ref.find(':');
        const std::string case_id = ref.substr(0, colon);
        const std::string key = ref.substr(colon + 1);
        if (!summaries.contains(case_id))
          throw std::runtime_error(fmt::format("cross check references missing case '{}'",
                                               case_id));
        return lookup(summaries.at(case_id), key, case_id);
      };
      CheckResult r;
      r.case_id = "cross";
      r.description = chk.at("name");
      const double smaller = resolve(chk.at("smaller"));
      const double larger = resolve(chk.at("larger"));
      r.expected = larger;
      r.actual = smaller;
      r.tolerance = "strict <";
      r.pass = smaller < larger;
      results.push_back(r);
      md << fmt::format("| {} | {:.9g} | {:.9g} | {} | {} |\n", r.description, smaller, larger,
                        r.pass ? "pass" : "FAIL", chk.value("source", ""));
    }

    int failures = 0;
    for (const auto& r : results)
      if (!r.pass) ++failures;
    md << fmt::format("\n{} checks, {} failure(s)\n", results.size(), failures);

    // Criteria coverage table for auditability.
    if (manifest.contains("criteria_map")) {
      md << "\n## criteria coverage\n\n| criterion | case |\n|---|---|\n";
      for (const auto& [row, case_id] : manifest.at("criteria_map").items())
        md << fmt::format("| {} | {} |\n", row, case_id.get<std::string>());
    }

    std::ofstream report(report_path, std::ios::binary);
    report << md.str();
    std::cout << md.str();
    std::cout << fmt::format("report written to {}\n", report_path);
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "repro runner error: " << e.what() << '\n';
    return 2;
  }
}
