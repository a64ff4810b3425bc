#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "clarity/config.hpp"
#include "clarity/pipeline.hpp"
#include "clarity/util.hpp"

namespace {

clarity::json load_config_json(const std::string& path) {
  if (path.empty()) return clarity::to_json(clarity::PipelineConfig{});
  if (!std::filesystem::exists(path)) {
    throw clarity::UsageError("config file not found: " + path);
  }
  try {
    return clarity::json::parse(clarity::read_file(path));
  } catch (const clarity::json::parse_error& e) {
    throw clarity::UsageError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clarityethic: norm-grounded moral judgment pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string workdir = ".";
  std::vector<std::string> overrides;
  bool dry_run = false;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--workdir", workdir, "Directory artifact paths resolve under")
      ->capture_default_str();
  app.add_option("--set", overrides,
                 "Override one config key as dotted.path=value (repeatable)");
  app.add_flag("--dry-run", dry_run, "Validate, print the plan, change nothing");

  auto* curate_cmd =
      app.add_subcommand("curate", "Collect two-sided rationales for every pair");

  std::vector<std::string> roles;
  auto* pretrain_cmd =
      app.add_subcommand("pretrain", "Train the generator and classifier heads");
  pretrain_cmd->add_option("--roles", roles, "Subset of heads to train")
      ->delimiter(',')
      ->check(CLI::IsMember({"rationale_generator", "norm_generator", "classifier"}));

  bool no_contrastive = false;
  auto* finetune_cmd =
      app.add_subcommand("finetune", "Jointly fine-tune the two generators");
  finetune_cmd->add_flag("--no-contrastive", no_contrastive,
                         "Drop the contrastive triplet term");

  bool select_tau = false;
  bool explain = false;
  double tau = 0.0;
  std::string evidence;
  std::string input_path;
  auto* infer_cmd = app.add_subcommand("infer", "Judge actions with the trained heads");
  infer_cmd->add_flag("--select-tau", select_tau,
                      "Pick the confidence threshold on the validation split");
  auto* tau_opt = infer_cmd->add_option("--tau", tau, "Confidence threshold override");
  infer_cmd->add_option("--evidence", evidence, "What the dual paths condition on")
      ->check(CLI::IsMember({"norms", "rationales"}));
  infer_cmd->add_flag("--explain", explain, "Print rationale and norm evidence per action");
  infer_cmd->add_option("--input", input_path,
                        "JSONL of actions to judge instead of the corpus test split");

  std::string baseline_path;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score saved judgments");
  evaluate_cmd->add_option("--baseline", baseline_path,
                           "Report to test significance against");

  auto* claritycot_cmd =
      app.add_subcommand("claritycot", "Prompting baselines over the test split");
  auto* ablate_cmd = app.add_subcommand("ablate", "Sweep the training-stage grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    clarity::json cfg_json = load_config_json(config_path);
    for (const auto& assignment : overrides) {
      clarity::apply_override(cfg_json, assignment);
    }
    clarity::PipelineConfig cfg;
    try {
      cfg = clarity::config_from_json(cfg_json);
    } catch (const clarity::json::exception& e) {
      throw clarity::UsageError(std::string("config: ") + e.what());
    }
    clarity::Pipeline pipeline(cfg, workdir);

    if (curate_cmd->parsed()) {
      pipeline.curate(dry_run);
    } else if (pretrain_cmd->parsed()) {
      std::vector<clarity::ModelKind> kinds;
      for (const auto& role : roles) kinds.push_back(clarity::model_kind_from_string(role));
      pipeline.pretrain(kinds, dry_run);
    } else if (finetune_cmd->parsed()) {
      pipeline.finetune(!no_contrastive, dry_run);
    } else if (infer_cmd->parsed()) {
      clarity::InferOptions opts;
      opts.select_tau = select_tau;
      opts.explain = explain;
      if (tau_opt->count() > 0) opts.tau = tau;
      if (!evidence.empty()) opts.evidence = evidence;
      if (!input_path.empty()) opts.input = input_path;
      pipeline.infer(opts, dry_run);
    } else if (evaluate_cmd->parsed()) {
      clarity::EvaluateOptions opts;
      if (!baseline_path.empty()) opts.baseline_report = baseline_path;
      pipeline.evaluate(opts, dry_run);
    } else if (claritycot_cmd->parsed()) {
      pipeline.prompting_baselines(dry_run);
    } else if (ablate_cmd->parsed()) {
      pipeline.ablate(dry_run);
    }
    return 0;
  } catch (const clarity::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
