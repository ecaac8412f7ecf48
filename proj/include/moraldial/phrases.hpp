#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moraldial/random.hpp"

namespace moraldial {

/// Fixed phrases inserted into constructed discussions. Why-class opens the
/// explanation request, But-class introduces the user's RoT, Sorry-class
/// prefixes the revised answer and Base-class introduces a follow-up question.
struct PhraseBank {
  std::vector<std::string> why_class;
  std::vector<std::string> but_class;
  std::vector<std::string> sorry_class;
  std::vector<std::string> base_class;

  static const PhraseBank& standard();
};

/// Uniform pick within a class.
const std::string& pick_phrase(std::span<const std::string> phrases, Rng& rng);

/// Joins an inserted phrase and a sentence. A phrase that ends mid-sentence
/// continues into the sentence, whose leading letter is lower-cased.
std::string join_phrase(std::string_view phrase, std::string_view sentence);

}  // namespace moraldial
