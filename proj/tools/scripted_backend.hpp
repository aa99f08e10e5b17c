// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "edzda/llm.hpp"
#include "edzda/util.hpp"

namespace edzda::tools {

/// Deterministic stand-in for a completion provider. It parses the pipeline's
/// own prompts and answers with well-formed, rule-abiding responses, so a full
/// pipeline run can be recorded into a cassette without any network access.
class ScriptedBackend : public LlmBackend {
public:
    std::string complete_once(const ChatRequest& req) override {
        const std::string& prompt = last_user_text(req);
        switch (req.stage_tag) {
            case Stage::Judgment: return judgment(prompt);
            case Stage::SeedState: return seed_states(prompt);
            case Stage::UserGoal: return user_goal();
            case Stage::Flow: return flow(prompt);
            case Stage::DialogueGen: return dialogue(prompt);
            case Stage::Complication: return complication(prompt);
        }
        throw TransportError("scripted backend: unknown stage");
    }

private:
    static const std::string& last_user_text(const ChatRequest& req) {
        for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
            if (it->role == "user") return it->text;
        }
        throw TransportError("scripted backend: request has no user message");
    }

    /// Text between `marker` and the following newline.
    static std::string grab_line(const std::string& text, const std::string& marker) {
        std::size_t pos = text.find(marker);
        if (pos == std::string::npos) {
            throw TransportError("scripted backend: prompt lacks marker '" + marker + "'");
        }
        pos += marker.size();
        std::size_t end = text.find('\n', pos);
        return text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    }

    static std::vector<std::string> split_list(const std::string& csv) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= csv.size()) {
            std::size_t comma = csv.find(", ", start);
            out.push_back(csv.substr(start, comma == std::string::npos ? std::string::npos
                                                                       : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 2;
        }
        return out;
    }

    // -- judgment ----------------------------------------------------------

    std::string judgment(const std::string& prompt) const {
        std::vector<std::string> domains = split_list(grab_line(prompt, "# domains: "));
        bool has_taxi = std::count(domains.begin(), domains.end(), "taxi") > 0;
        bool has_train = std::count(domains.begin(), domains.end(), "train") > 0;
        Json out;
        if (has_taxi && has_train) {
            out = Json{{"is_reasonable", 0},
                       {"explanation", "A taxi and a train cover the same trip; a user would "
                                       "not arrange both forms of transport in one dialogue."}};
        } else {
            std::string listing;
            for (std::size_t i = 0; i < domains.size(); ++i) {
                listing += (i ? " and " : "") + domains[i];
            }
            out = Json{{"is_reasonable", 1},
                       {"explanation", "Combining " + listing + " fits a single errand around "
                                       "town, with bookings and travel that follow naturally "
                                       "from one another."}};
        }
        return out.dump();
    }

    // -- seed states ---------------------------------------------------------

    static std::string first_present(const std::set<std::string>& has,
                                     std::initializer_list<const char*> wanted) {
        for (const char* d : wanted) {
            if (has.contains(d)) return d;
        }
        return "";
    }

    /// Two seed dictionaries per combo. The anchor domain carries a literal
    /// area; other venue domains share it by reference. The second seed plants
    /// one deliberately illegal reference so the rule filter has work to do.
    std::string seed_states(const std::string& prompt) const {
        std::string listing = grab_line(prompt, "combining the domains [");
        std::size_t close = listing.rfind(']');
        if (close != std::string::npos) listing.resize(close);
        std::vector<std::string> domains = split_list(listing);
        std::set<std::string> has(domains.begin(), domains.end());
        std::string anchor = first_present(has, {"restaurant", "hotel", "attraction"});

        Json seeds = Json::array();
        for (int variant = 0; variant < 2; ++variant) {
            Json s = Json::object();
            auto area_of = [&](const std::string& domain) -> std::string {
                return domain == anchor ? "centre" : anchor + "-area";
            };
            if (has.contains("restaurant")) {
                s["restaurant-area"] = area_of("restaurant");
                s["restaurant-food"] = variant == 0 ? "british" : "chinese";
                if (variant == 0) s["restaurant-pricerange"] = "expensive";
                s["restaurant-name"] = "";
                s["restaurant-book time"] = "";
                s["restaurant-book day"] = variant == 0 ? "friday" : "saturday";
                s["restaurant-book people"] = variant == 0 ? "2" : "4";
            }
            if (has.contains("hotel")) {
                s["hotel-area"] = area_of("hotel");
                s["hotel-type"] = variant == 0 ? "guest house" : "hotel";
                s["hotel-pricerange"] = variant == 0 ? "cheap" : "expensive";
                if (variant == 0) s["hotel-internet"] = "yes";
                s["hotel-name"] = "";
                s["hotel-book day"] = variant == 0 ? "friday" : "saturday";
                s["hotel-book stay"] = variant == 0 ? "2" : "3";
                if (variant == 0) s["hotel-book people"] = "2";
            }
            if (has.contains("attraction")) {
                s["attraction-area"] = area_of("attraction");
                s["attraction-type"] = variant == 0 ? "museum" : "college";
                s["attraction-name"] = "";
            }
            if (has.contains("train")) {
                s["train-day"] = variant == 0 ? "friday" : "monday";
                s["train-leaveat"] = "";
                s["train-departure"] = "";
                s["train-destination"] = "";
                s["train-book people"] = variant == 0 ? "2" : "1";
            }
            if (has.contains("taxi")) {
                std::string dest = variant == 0
                                       ? first_present(has, {"restaurant", "hotel", "attraction"})
                                       : first_present(has, {"attraction", "hotel", "restaurant"});
                s["taxi-destination"] = dest + "-name";
                std::string dep = first_present(
                    has, dest == "hotel" ? std::initializer_list<const char*>{"attraction"}
                                         : std::initializer_list<const char*>{"hotel"});
                s["taxi-departure"] = dep.empty() ? "" : dep + "-name";
                if (variant == 0) {
                    s["taxi-arriveby"] =
                        has.contains("restaurant") ? "restaurant-book time" : "";
                } else if (has.contains("restaurant")) {
                    // Illegal on purpose: a taxi departure time cannot be
                    // inferred from a booking time. The filter drops it.
                    s["taxi-leaveat"] = "restaurant-book time";
                } else {
                    s["taxi-leaveat"] = "";
                }
            }
            seeds.push_back(std::move(s));
        }
        return seeds.dump(2);
    }

    // -- user goal -----------------------------------------------------------

    std::string user_goal() const {
        return "The user is organizing a day out and needs help arranging everything in one "
               "conversation. They have firm preferences for each part of the plan and want "
               "the agent to suggest suitable places, confirm the details and complete any "
               "bookings on their behalf.";
    }

    // -- dialogue flow -------------------------------------------------------

    static constexpr std::size_t kChunk = 4;

    std::string flow(const std::string& prompt) const {
        Json state = Json::parse(grab_line(prompt, "## Dialogue State: "));
        Json turns = Json::array();
        bool first = true;
        for (const char* domain : {"restaurant", "hotel", "attraction", "train", "taxi"}) {
            std::vector<std::string> keys;
            for (auto it = state.begin(); it != state.end(); ++it) {
                if (it.key().rfind(std::string(domain) + "-", 0) == 0) keys.push_back(it.key());
            }
            for (std::size_t off = 0; off < keys.size(); off += kChunk) {
                Json chunk = Json::object();
                for (std::size_t i = off; i < std::min(off + kChunk, keys.size()); ++i) {
                    chunk[keys[i]] = state.at(keys[i]);
                }
                std::string agent_desc =
                    first ? "the agent greets the user and asks what they need"
                          : std::string("the agent asks about the ") + domain + " requirements";
                turns.push_back(Json{{"description", agent_desc},
                                     {"turn state", Json::object()}});
                turns.push_back(Json{{"description", std::string("the user states ") + domain +
                                                         " preferences"},
                                     {"turn state", std::move(chunk)}});
                first = false;
            }
        }
        return turns.dump();
    }

    // -- dialogue text -------------------------------------------------------

    static std::string say_value(const std::string& key, const std::string& value) {
        SlotId id = split_slot_key(key);
        if (value == "dontcare") {
            return "i have no preference for the " + id.domain + " " + id.slot + ".";
        }
        if (id.slot == "internet" || id.slot == "parking") {
            return value == "yes" ? "i want one with " + id.slot + "."
                                  : "i want one with no " + id.slot + ".";
        }
        return "for the " + id.domain + ", the " + id.slot + " should be " + value + ".";
    }

    std::string dialogue(const std::string& prompt) const {
        Json flow_turns = Json::parse(grab_line(prompt, "## Dialogue Flow: "));
        Json out = Json::array();
        for (const Json& ft : flow_turns) {
            std::string role = ft.at("role").get<std::string>();
            std::string content;
            if (role == "agent") {
                content = "of course. " + ft.at("description").get<std::string>() +
                          ", so please tell me more.";
            } else {
                const Json& ts = ft.at("turn state");
                for (auto it = ts.begin(); it != ts.end(); ++it) {
                    if (!content.empty()) content += " ";
                    content += say_value(it.key(), it.value().get<std::string>());
                }
                if (content.empty()) content = "thank you, that is everything.";
            }
            out.push_back(Json{{"role", role}, {"description", ft.at("description")},
                               {"content", std::move(content)}});
        }
        return out.dump();
    }

    // -- complication --------------------------------------------------------

    std::string complication(const std::string& prompt) const {
        std::string block = grab_line(prompt, "## Current Turn Utterances:\nsystem: ");
        Json turn_state = Json::parse(grab_line(prompt, "## Turn State: "));
        Json coref = Json::parse(grab_line(prompt, "## Co-reference: "));

        std::string user;
        for (auto it = turn_state.begin(); it != turn_state.end(); ++it) {
            if (!user.empty()) user += " ";
            if (coref.contains(it.key())) {
                SlotId id = split_slot_key(it.key());
                user += "the " + id.domain + " " + id.slot +
                        " should match what we already arranged.";
            } else {
                user += say_value(it.key(), it.value().get<std::string>());
            }
        }
        return Json{{"description", "the value repeats an earlier choice, so the user refers "
                                    "back to it instead of restating it"},
                    {"system", block}, {"user", user}}
            .dump();
    }
};

}  // namespace edzda::tools
