// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "edzda/pipeline.hpp"

namespace {

edzda::PipelineConfig load_config(const std::string& path, const CLI::App& overrides) {
    edzda::PipelineConfig cfg = edzda::PipelineConfig::from_file(path);
    if (overrides.count("--out-dir")) {
        cfg.out_dir = overrides.get_option("--out-dir")->as<std::string>();
    }
    if (overrides.count("--workers")) {
        cfg.workers = overrides.get_option("--workers")->as<int>();
    }
    if (overrides.count("--variant")) {
        cfg.variant = overrides.get_option("--variant")->as<std::string>();
    }
    if (overrides.count("--no-resume")) cfg.resume = false;
    if (overrides.count("--no-permute")) cfg.permute = false;
    if (overrides.count("--seed")) {
        cfg.rng_seed = overrides.get_option("--seed")->as<std::uint64_t>();
        cfg.rng_seed_set = true;
    }
    cfg.validate();
    return cfg;
}

void add_pipeline_flags(CLI::App& app, std::string& config_path) {
    app.add_option("--config", config_path, "pipeline configuration file (JSON)")->required();
    app.add_option("--out-dir", "override the output directory");
    app.add_option("--workers", "override the worker count");
    app.add_option("--variant", "easy, difficult or both")
        ->check(CLI::IsMember({"easy", "difficult", "both"}));
    app.add_flag("--no-resume", "regenerate everything instead of reusing artifacts");
    app.add_flag("--no-permute", "skip slot-value permutation during augmentation");
    app.add_option("--seed", "override the RNG seed");
}

void print_summaries(const std::vector<edzda::StageSummary>& summaries) {
    for (const edzda::StageSummary& s : summaries) {
        std::printf("%-10s %s\n", s.stage.c_str(), s.data.dump().c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dialogue-state data augmentation pipeline"};
    app.require_subcommand(1);

    std::string run_config, stage_config, stage_name;
    CLI::App* run = app.add_subcommand("run-all", "run every pipeline stage in order");
    add_pipeline_flags(*run, run_config);

    CLI::App* stage = app.add_subcommand("stage", "run a single pipeline stage");
    stage->add_option("name", stage_name, "stage to run")->required();
    add_pipeline_flags(*stage, stage_config);

    std::string gold, pred, variant = "easy", report_out;
    std::optional<std::string> annotations;
    CLI::App* eval = app.add_subcommand("eval", "score predictions against gold dialogues");
    eval->add_option("--gold", gold, "gold labeled dialogues (JSONL)")->required();
    eval->add_option("--pred", pred, "model predictions (JSONL)")->required();
    eval->add_option("--annotations", annotations, "co-reference annotations (JSONL)");
    eval->add_option("--variant", variant, "which gold variant to score against")
        ->check(CLI::IsMember({"easy", "difficult"}));
    eval->add_option("--out", report_out, "write the report to this file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            edzda::Pipeline pipeline(load_config(run_config, *run));
            print_summaries(pipeline.run_all());
        } else if (stage->parsed()) {
            edzda::Pipeline pipeline(load_config(stage_config, *stage));
            print_summaries({pipeline.run_stage(stage_name)});
        } else if (eval->parsed()) {
            std::optional<std::filesystem::path> ann;
            if (annotations) ann = *annotations;
            edzda::Json report = edzda::evaluate_files(gold, pred, ann, variant);
            if (report_out.empty()) {
                std::printf("%s\n", report.dump(2).c_str());
            } else {
                edzda::write_json_file(report_out, report);
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
