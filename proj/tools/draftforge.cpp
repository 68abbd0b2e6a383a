// draftforge command-line entry point: serve, corpus gen, eval summarize.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "draftforge/corpus.hpp"
#include "draftforge/error.hpp"
#include "draftforge/eval.hpp"
#include "draftforge/http_api.hpp"
#include "draftforge/lexicon.hpp"

namespace {

using namespace draftforge;
using nlohmann::json;

draftforge::HttpApi* g_api = nullptr;

void on_signal(int) {
  if (g_api != nullptr) g_api->stop();
}

// CSV with header rating,minutes_saved; either cell may be empty.
void read_survey(const std::string& path, std::vector<double>& ratings, std::vector<double>& saved) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line_no == 1) {
      if (trim(line) != "rating,minutes_saved") fail(ErrorKind::MalformedLine, "expected header rating,minutes_saved", 1);
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorKind::MalformedLine, "expected two fields", line_no);
    const auto rating = trim(line.substr(0, comma));
    const auto minutes = trim(line.substr(comma + 1));
    try {
      if (!rating.empty()) ratings.push_back(std::stod(rating));
      if (!minutes.empty()) saved.push_back(std::stod(minutes));
    } catch (const std::exception&) {
      fail(ErrorKind::MalformedLine, "bad number", line_no);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"draftforge: report draft generation pipeline and review service"};
  app.require_subcommand(1);

  auto* serve = app.add_subcommand("serve", "Run the review service HTTP API");
  std::string config_path;
  int port_override = -1;
  serve->add_option("--config", config_path, "Service config file (JSON)")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port_override, "Override the configured listen port");

  auto* corpus = app.add_subcommand("corpus", "Training corpus tools");
  corpus->require_subcommand(1);
  auto* gen = corpus->add_subcommand("gen", "Generate noisy/clean and extraction datasets");
  CorpusOptions opts;
  std::string fixtures, out, assets;
  gen->add_option("--fixtures", fixtures, "Directory of case-law *.jsonl fixtures")->required()->check(CLI::ExistingDirectory);
  gen->add_option("--pairs", opts.pairs, "Noisy/clean pairs to generate")->capture_default_str();
  gen->add_option("--events", opts.events, "Event records in the extraction dataset")->capture_default_str();
  gen->add_option("--seed", opts.seed, "Master seed")->capture_default_str();
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--assets", assets, "Asset directory (lexicons, prompts)");
  gen->add_option("--word-rate", opts.word_corruption_rate, "Word corruption rate")->capture_default_str();
  gen->add_option("--swap-rate", opts.speaker_swap_rate, "Speaker swap rate")->capture_default_str();
  gen->add_option("--interjection-rate", opts.interjection_rate, "Interjection rate")->capture_default_str();
  gen->add_option("--target-total", opts.target_total, "Sampling target")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluation statistics");
  eval->require_subcommand(1);
  auto* summarize_cmd = eval->add_subcommand("summarize", "Paired rubric statistics and Table 1 layout");
  std::string scores_path, survey_path;
  std::optional<double> baseline_minutes;
  bool as_json = false;
  summarize_cmd->add_option("--scores", scores_path, "Rubric score CSV")->required()->check(CLI::ExistingFile);
  summarize_cmd->add_option("--baseline-minutes", baseline_minutes, "Unassisted writing time per report");
  summarize_cmd->add_option("--survey", survey_path, "Usability CSV: rating,minutes_saved")->check(CLI::ExistingFile);
  summarize_cmd->add_flag("--json", as_json, "Emit JSON instead of the table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve->parsed()) {
      auto config = load_service_config(config_path);
      if (port_override >= 0) config.listen_port = port_override;
      HttpApi api(config);
      g_api = &api;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const int port = api.bind();
      std::cerr << "listening on " << config.listen_host << ":" << port << std::endl;
      api.listen();
      g_api = nullptr;
      return 0;
    }
    if (gen->parsed()) {
      opts.fixtures_dir = fixtures;
      opts.out_dir = out;
      opts.asset_dir = assets.empty() ? default_asset_dir() : std::filesystem::path(assets);
      const auto manifest = generate_corpus(opts);
      std::cout << json(manifest).dump(2) << std::endl;
      return 0;
    }
    if (summarize_cmd->parsed()) {
      const auto results = summarize(parse_scores_csv(read_text_file(scores_path)));
      std::optional<UsabilitySummary> usage;
      if (!survey_path.empty()) {
        std::vector<double> ratings, saved;
        read_survey(survey_path, ratings, saved);
        usage = usability(ratings, saved, baseline_minutes);
      }
      if (as_json) {
        json j = {{"results", results}};
        if (usage) j["usability"] = *usage;
        std::cout << j.dump(2) << std::endl;
        return 0;
      }
      std::cout << render_table(results);
      if (usage) {
        std::printf("Mean usability rating: %.2f\nMean minutes saved per report: %.2f\n", usage->mean_rating,
                    usage->mean_minutes_saved);
        if (usage->percent_of_baseline_time) std::printf("Share of baseline writing time saved: %.2f%%\n", *usage->percent_of_baseline_time);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.name() << ": " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
