// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "edzda/augment.hpp"
#include "edzda/complicator.hpp"
#include "edzda/dialogue_gen.hpp"
#include "edzda/eval.hpp"
#include "edzda/llm.hpp"
#include "edzda/planner.hpp"
#include "edzda/schema.hpp"
#include "edzda/state_synth.hpp"

namespace edzda {

struct PipelineConfig {
    std::filesystem::path schema_path;
    std::map<std::string, std::filesystem::path> database_paths;
    std::string backend = "replay";  // http | replay
    std::filesystem::path cassette_path;
    std::optional<std::filesystem::path> cache_dir;
    std::filesystem::path out_dir = "out";
    std::uint64_t rng_seed = 0;
    bool rng_seed_set = false;

    int states_per_seed = 5;
    int seeds_per_combo_cap = 8;
    SynthConfig synth;
    std::string variant = "both";  // easy | difficult | both
    bool permute = true;
    AugmentConfig augment;
    int workers = 1;
    bool resume = true;

    HttpBackendConfig http;
    RetryPolicy retry;
    /// Per-stage decoding overrides; defaults are 0.7 for dialogue
    /// generation, 0 elsewhere, top-p 1 everywhere.
    std::map<std::string, StageDecoding> decoding;

    static PipelineConfig from_file(const std::filesystem::path& path);
    static PipelineConfig from_json(const Json& doc, const std::filesystem::path& base_dir);
    void validate() const;
};

struct StageSummary {
    std::string stage;
    Json data;
};

class Pipeline {
public:
    explicit Pipeline(PipelineConfig config);
    /// Same, but with a caller-supplied backend instead of the configured one.
    Pipeline(PipelineConfig config, std::shared_ptr<LlmBackend> backend);

    /// Executes one named stage; prerequisites must already have run.
    /// Stages: judge, seed, synth, goal, flow, dialogue, complicate, augment.
    StageSummary run_stage(const std::string& name);

    /// judge -> seed -> synth -> goal -> flow -> dialogue -> complicate -> augment.
    std::vector<StageSummary> run_all();

    /// Enables cassette recording; the cassette is written after each stage.
    void record_to(const std::filesystem::path& cassette_path);

    const Schema& schema() const { return schema_; }
    const Database& database() const { return db_; }
    LlmClient& llm() { return *llm_; }

    static const std::vector<std::string>& stage_order();

private:
    StageSummary run_judge();
    StageSummary run_seed();
    StageSummary run_synth();
    StageSummary run_goal();
    StageSummary run_flow();
    StageSummary run_dialogue();
    StageSummary run_complicate();
    StageSummary run_augment();

    std::vector<Json> require_artifact(const std::string& file, const std::string& needed_by);
    void write_summary(const StageSummary& summary);
    void maybe_save_cassette();

    PipelineConfig config_;
    Schema schema_;
    Database db_;
    std::shared_ptr<LlmBackend> backend_;
    std::unique_ptr<LlmClient> llm_;
    Lexicon lexicon_;
    std::optional<std::filesystem::path> record_path_;
};

/// Standalone evaluation: gold labeled.jsonl + prediction/annotation files.
Json evaluate_files(const std::filesystem::path& gold_labeled,
                    const std::filesystem::path& predictions,
                    const std::optional<std::filesystem::path>& annotations,
                    const std::string& variant = "easy");

}  // namespace edzda
