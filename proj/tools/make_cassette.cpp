// SPDX-License-Identifier: Apache-2.0
//
// Runs the full pipeline against the scripted backend and records every
// exchange into a cassette, so tests and offline runs can replay it.

#include <cstdio>
#include <filesystem>
#include <memory>

#include "edzda/pipeline.hpp"
#include "scripted_backend.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    if (argc < 3 || argc > 5) {
        std::fprintf(stderr,
                     "usage: %s <fixtures_dir> <out_cassette> [out_dir] [rng_seed]\n", argv[0]);
        return 2;
    }
    fs::path fixtures = argv[1];
    fs::path cassette = argv[2];
    fs::path out_dir = argc > 3 ? fs::path(argv[3])
                                : fs::temp_directory_path() / "edzda-cassette-out";
    std::uint64_t seed = argc > 4 ? std::stoull(argv[4]) : 20260826ULL;

    try {
        edzda::PipelineConfig cfg;
        cfg.schema_path = fixtures / "schema.json";
        for (const char* d : {"restaurant", "hotel", "attraction", "train"}) {
            cfg.database_paths[d] = fixtures / "db" / (std::string(d) + ".json");
        }
        cfg.out_dir = out_dir;
        cfg.rng_seed = seed;
        cfg.rng_seed_set = true;

        fs::remove_all(out_dir);
        edzda::Pipeline pipeline(cfg, std::make_shared<edzda::tools::ScriptedBackend>());
        pipeline.record_to(cassette);
        for (const edzda::StageSummary& s : pipeline.run_all()) {
            std::printf("%-10s %s\n", s.stage.c_str(), s.data.dump().c_str());
        }
        std::printf("cassette written to %s\n", cassette.string().c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
