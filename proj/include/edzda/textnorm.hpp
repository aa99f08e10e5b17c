// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace edzda {

/// Canonical value normalization: lowercase, trim, collapse whitespace,
/// strip a leading article ("the "), zero-pad bare times ("9:00" -> "09:00").
std::string normalize_value(std::string_view raw);

/// Utterance normalization for matching: lowercase, punctuation (except ':')
/// replaced by spaces, whitespace collapsed, padded with one space on each
/// side so token-boundary substring checks are cheap.
std::string normalize_utterance(std::string_view raw);

/// Normalizes a short phrase the same way normalize_utterance treats running
/// text (punctuation stripped), without the surrounding padding. Needles must
/// go through this before token matching.
std::string normalize_phrase(std::string_view raw);

/// True when `needle` (already normalized) occurs at token boundaries inside
/// a normalize_utterance()-processed haystack.
bool contains_token_phrase(const std::string& normalized_utterance, std::string_view needle);

bool looks_like_time(std::string_view v);

/// Surface variants a time value may take in text: "12:30", "12:30 pm",
/// unpadded, and the 12-hour clock form.
std::vector<std::string> time_surface_forms(std::string_view value);

}  // namespace edzda
