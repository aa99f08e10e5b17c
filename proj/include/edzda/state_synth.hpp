// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "edzda/planner.hpp"
#include "edzda/rng.hpp"
#include "edzda/schema.hpp"

namespace edzda {

struct DialogueState {
    std::string state_id;
    std::string seed_id;
    std::map<std::string, std::string> entries;      // "domain-slot" -> value
    std::vector<CorefLink> coref;                     // inherited from the seed
    std::map<std::string, Entity> chosen_entities;    // per DB-backed domain
};

struct CycleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsatisfiableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Domains in an order where every Reference source domain precedes its
/// target domain; ties broken by the seed's domain order. Throws CycleError
/// naming the domains stuck in a cycle.
std::vector<std::string> dependency_order(const SeedState& seed);

struct SynthConfig {
    double dontcare_probability = 0.0;
    int retry_cap = 10;
    int time_grid_start_minutes = 8 * 60;
    int time_grid_end_minutes = 22 * 60;
    int time_grid_step_minutes = 15;
};

/// Grounds every entry of the seed: domains processed in dependency order,
/// DB-backed domains filled from a constraint-filtered entity pick,
/// remaining blanks sampled, references copied from their source value.
DialogueState fill_state(const SeedState& seed, const Schema& schema, const Database& db,
                         Rng& rng, const SynthConfig& config = {});

/// Up to n independently sampled states; duplicates and unsatisfiable
/// attempts are dropped.
std::vector<DialogueState> expand_seed(const SeedState& seed, const Schema& schema,
                                       const Database& db, int n, Rng& rng,
                                       const SynthConfig& config = {});

}  // namespace edzda
