#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "scaffoldlab/cli_reporter.hpp"
#include "scaffoldlab/errors.hpp"

namespace fs = std::filesystem;
using namespace scaffoldlab;

namespace {

struct Outcome {
  int code = 0;            // 0 ok, 1 config, 2 precision, 3 contract/internal
  std::string rendered;    // report in the requested format (when code == 0)
  std::string error;
};

Outcome run_one(const std::string& path, const std::string& format,
                std::optional<long long> precision,
                std::optional<std::pair<long long, long long>> window) {
  Outcome out;
  const auto with_path = [&path](std::string msg) {
    if (msg.rfind(path, 0) != 0) msg = path + ": " + msg;
    return msg;
  };
  try {
    CaseConfig cfg = load_config(path);
    if (precision) cfg.series_precision = precision;
    if (window) cfg.verify.window = window;
    out.rendered = render_report(analyze(cfg), format);
  } catch (const ConfigError& e) {
    out.code = 1;
    out.error = with_path(e.what());
  } catch (const PrecisionError& e) {
    out.code = 2;
    out.error = with_path(std::string("precision exhausted: ") + e.what());
  } catch (const ContractError& e) {
    out.code = 3;
    out.error = with_path(std::string("internal contract violated: ") + e.what());
  } catch (const std::exception& e) {
    out.code = 3;
    out.error = with_path(e.what());
  }
  return out;
}

// family_a.config.json -> family_a; report extension follows the format
std::string report_name(const std::string& input, const std::string& format) {
  std::string stem = fs::path(input).stem().string();
  const std::string tail = ".config";
  if (stem.size() > tail.size() && stem.compare(stem.size() - tail.size(), tail.size(), tail) == 0)
    stem.resize(stem.size() - tail.size());
  return stem + (format == "json" ? ".report.json" : ".report.txt");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact ramification and scaffold analysis for cyclic p^n towers over F_p((t))"};
  app.require_subcommand(1);

  CLI::App* an = app.add_subcommand("analyze", "analyze one or more case config files");
  std::vector<std::string> files;
  an->add_option("files", files, "case config JSON files")->required()->expected(-1);
  bool as_json = false;
  bool as_text = false;
  CLI::Option* opt_json = an->add_flag("--json", as_json, "emit JSON reports (default)");
  an->add_flag("--text", as_text, "emit plain-text reports")->excludes(opt_json);
  std::string out_dir;
  an->add_option("--out", out_dir, "write one report file per input into this directory");
  long long precision = 0;
  CLI::Option* opt_prec =
      an->add_option("--precision", precision, "override series precision for every case")
          ->check(CLI::Range(16LL, 1LL << 40));
  std::vector<long long> window;
  CLI::Option* opt_win =
      an->add_option("--window", window, "override verification window: LO HI (hi exclusive)")
          ->expected(2);

  CLI11_PARSE(app, argc, argv);

  const std::string format = as_text ? "text" : "json";
  std::optional<long long> prec_override;
  if (*opt_prec) prec_override = precision;
  std::optional<std::pair<long long, long long>> win_override;
  if (*opt_win) {
    if (window[1] <= window[0]) {
      std::cerr << "--window requires LO < HI\n";
      return 1;
    }
    win_override = std::make_pair(window[0], window[1]);
  }

  // independent contexts per file; results are printed in input order
  std::vector<std::future<Outcome>> futures;
  futures.reserve(files.size());
  for (const std::string& f : files)
    futures.push_back(std::async(std::launch::async, run_one, f, format, prec_override,
                                 win_override));

  int exit_code = 0;
  nlohmann::json combined = nlohmann::json::object();
  std::string text_out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    Outcome out = futures[i].get();
    if (out.code != 0) {
      std::cerr << out.error << "\n";
      exit_code = std::max(exit_code, out.code);
      continue;
    }
    if (!out_dir.empty()) {
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      const fs::path target = fs::path(out_dir) / report_name(files[i], format);
      std::ofstream sink(target, std::ios::binary);
      if (!sink || !(sink << out.rendered)) {
        std::cerr << files[i] << ": cannot write " << target.string() << "\n";
        exit_code = std::max(exit_code, 1);
        continue;
      }
      std::cerr << "wrote " << target.string() << "\n";
    } else if (files.size() == 1) {
      std::cout << out.rendered;
    } else if (format == "json") {
      combined[fs::path(files[i]).filename().string()] = nlohmann::json::parse(out.rendered);
    } else {
      text_out += "== " + files[i] + " ==\n" + out.rendered + "\n";
    }
  }
  if (out_dir.empty() && files.size() > 1) {
    if (format == "json")
      std::cout << combined.dump(2) << "\n";
    else
      std::cout << text_out;
  }
  return exit_code;
}
