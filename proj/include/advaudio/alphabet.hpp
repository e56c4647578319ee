/* Copyright 2026 The advaudio Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <string>
#include <vector>

#include "advaudio/errors.hpp"

namespace advaudio {

/// Token indices into an output alphabet. For the speech alphabet these are
/// a..z = 0..25, space = 26, blank = 27.
using Labels = std::vector<int>;

struct Alphabet {
  static constexpr int kSize = 28;
  static constexpr int kSpace = 26;
  static constexpr int kBlank = 27;

  static bool is_letter(char c) { return c >= 'a' && c <= 'z'; }

  static int token(char c) {
    if (is_letter(c)) return c - 'a';
    if (c == ' ') return kSpace;
    throw PreconditionError(std::string("character '") + c + "' is not in the alphabet [a-z ]");
  }

  static char symbol(int t) {
    if (t >= 0 && t < 26) return static_cast<char>('a' + t);
    if (t == kSpace) return ' ';
    if (t == kBlank) return '_';
    throw PreconditionError("token " + std::to_string(t) + " is not in the alphabet");
  }

  /// Phrase text -> labels. Phrases never contain the blank.
  static Labels encode(const std::string& phrase) {
    Labels out;
    out.reserve(phrase.size());
    for (char c : phrase) out.push_back(token(c));
    return out;
  }

  /// Labels -> text; blanks print as '_' (only meaningful for alignments).
  static std::string decode(const Labels& labels) {
    std::string s;
    s.reserve(labels.size());
    for (int t : labels) s.push_back(symbol(t));
    return s;
  }

  static void validate_phrase(const std::string& phrase) {
    for (char c : phrase) token(c);
  }
};

/// True if the phrase is empty or made only of spaces. The silence attack
/// treats such transcriptions as "nothing was said".
inline bool is_silent_phrase(const std::string& phrase) {
  return phrase.find_first_not_of(' ') == std::string::npos;
}

}  // namespace advaudio
