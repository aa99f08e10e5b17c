// SPDX-License-Identifier: Apache-2.0
#include "edzda/textnorm.hpp"

#include <cctype>

namespace edzda {

namespace {

std::string collapse_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;  // also trims leading whitespace
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_ws = true;
        } else {
            if (in_ws && !out.empty()) out.push_back(' ');
            out.push_back(c);
            in_ws = false;
        }
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

bool looks_like_time(std::string_view v) {
    auto colon = v.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon > 2) return false;
    if (v.size() - colon != 3) return false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i == colon) continue;
        if (!std::isdigit(static_cast<unsigned char>(v[i]))) return false;
    }
    return true;
}

std::string normalize_value(std::string_view raw) {
    std::string s = collapse_ws(lower(raw));
    if (s.rfind("the ", 0) == 0) s = s.substr(4);
    if (looks_like_time(s) && s.find(':') == 1) s = "0" + s;
    return s;
}

std::string normalize_utterance(std::string_view raw) {
    std::string tmp = lower(raw);
    for (char& c : tmp) {
        unsigned char u = static_cast<unsigned char>(c);
        if (c != ':' && (std::ispunct(u) != 0)) c = ' ';
        if (u >= 0x80) c = ' ';  // drop non-ascii (curly quotes etc.)
    }
    return " " + collapse_ws(tmp) + " ";
}

std::string normalize_phrase(std::string_view raw) {
    std::string padded = normalize_utterance(raw);
    // strip the single space of padding on each side
    if (padded.size() <= 2) return "";
    return padded.substr(1, padded.size() - 2);
}

bool contains_token_phrase(const std::string& normalized_utterance, std::string_view needle) {
    if (needle.empty()) return false;
    std::string probe = " ";
    probe += needle;
    probe += " ";
    return normalized_utterance.find(probe) != std::string::npos;
}

std::vector<std::string> time_surface_forms(std::string_view value) {
    std::string v = normalize_value(value);
    std::vector<std::string> forms{v};
    if (!looks_like_time(v)) return forms;
    int hh = (v[0] - '0') * 10 + (v[1] - '0');
    std::string mm = v.substr(3);
    if (v[0] == '0') forms.push_back(v.substr(1));  // "09:00" -> "9:00"
    const char* suffix = hh < 12 ? "am" : "pm";
    int h12 = hh % 12;
    if (h12 == 0) h12 = 12;
    std::string twelve = std::to_string(h12) + ":" + mm;
    forms.push_back(twelve + " " + suffix);
    forms.push_back(twelve);
    forms.push_back(v + " " + suffix);
    if (v[0] == '0') forms.push_back(v.substr(1) + " " + suffix);
    return forms;
}

}  // namespace edzda
