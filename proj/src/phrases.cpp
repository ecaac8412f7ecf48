#include "moraldial/phrases.hpp"

#include "moraldial/error.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

const PhraseBank& PhraseBank::standard() {
  static const PhraseBank bank{
      .why_class = {"Can you tell me why?",
                    "Why?",
                    "What is the basis of that?",
                    "Say it clear, please.",
                    "Why do you think that?",
                    "What is the reason?",
                    "Would you like to tell me why?",
                    "I just want to know why.",
                    "Tell me the reason, please.",
                    "Sorry, I'd like to know the reason.",
                    "Thanks, and why?",
                    "Why is that?",
                    "Why do you say that?",
                    "Any rule of thumb?",
                    "Any reason?",
                    "What values are you expressing?"},
      .but_class = {"But from my perspective",
                    "Have you ever thought that",
                    "Did you consider that",
                    "But I think",
                    "As a rule of thumb,",
                    "But most people think that",
                    "However, most people consider that",
                    "Your answer violates the thing that",
                    "Your answer does not entail",
                    "Your answer contradicts that",
                    "But most people do not agree that",
                    "From my perspective, only a few people think that",
                    "Actually I do not agree that"},
      .sorry_class = {"I'm sorry.",
                      "Yes, you are right.",
                      "I'd like to correct my answer.",
                      "Let me see... I think",
                      "Good idea.",
                      "After being revised by you, I think",
                      "That makes sense.",
                      "Sorry.",
                      "I was wrong.",
                      "I made a mistake.",
                      "Thanks for correcting.",
                      "Make sense!"},
      .base_class = {"Based on the rule of thumb, I want to ask another question.",
                     "Yes, and based on that, here comes another question.",
                     "I have a similar question for you.",
                     "How about this similar question.",
                     "May you answer the similar question for me?",
                     "Given what you have learnt, can you answer this question?"},
  };
  return bank;
}

const std::string& pick_phrase(std::span<const std::string> phrases, Rng& rng) {
  if (phrases.empty()) throw InputError("empty phrase class");
  return phrases[rng.index(phrases.size())];
}

std::string join_phrase(std::string_view phrase, std::string_view sentence) {
  const std::string p = text::trim(phrase);
  const std::string s = text::trim(sentence);
  if (text::ends_sentence(p)) return p + " " + s;
  return p + " " + text::lower_leading(s);
}

}  // namespace moraldial
