#include "perspectra/types.hpp"

#include <stdexcept>

namespace perspectra {
namespace {

constexpr std::array<std::string_view, kNumEntities> kEntityTokens{
    "black_americans", "police",     "community",      "racism",
    "democrats",       "republicans", "government",    "white_americans",
    "blm_movement",    "petition",   "antifa",
};

}  // namespace

std::string_view to_string(Stance s) {
  return s == Stance::ProBlackLM ? "pro_blacklm" : "pro_bluelm";
}

std::string_view to_string(Sentiment s) {
  return s == Sentiment::Positive ? "positive" : "negative";
}

std::string_view to_string(Role r) { return r == Role::Actor ? "actor" : "target"; }

std::string_view to_string(AbstractEntity e) { return kEntityTokens.at(code(e)); }

std::string to_string(const Perspective& p) {
  std::string out{to_string(p.entity)};
  out += '_';
  out += to_string(p.sentiment);
  out += '_';
  out += to_string(p.role);
  return out;
}

std::optional<Stance> parse_stance(std::string_view token) {
  if (token == "pro_blacklm") return Stance::ProBlackLM;
  if (token == "pro_bluelm") return Stance::ProBlueLM;
  return std::nullopt;
}

std::optional<Sentiment> parse_sentiment(std::string_view token) {
  if (token == "positive" || token == "pos") return Sentiment::Positive;
  if (token == "negative" || token == "neg") return Sentiment::Negative;
  return std::nullopt;
}

std::optional<Role> parse_role(std::string_view token) {
  if (token == "actor") return Role::Actor;
  if (token == "target") return Role::Target;
  return std::nullopt;
}

std::optional<AbstractEntity> parse_entity(std::string_view token) {
  for (int i = 0; i < kNumEntities; ++i) {
    if (kEntityTokens[i] == token) return static_cast<AbstractEntity>(i);
  }
  return std::nullopt;
}

AbstractEntity entity_from_code(int c) {
  if (c < 0 || c >= kNumEntities) throw std::out_of_range("abstract entity code out of range");
  return static_cast<AbstractEntity>(c);
}

}  // namespace perspectra
