#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace perspectra {

enum class Stance : std::uint8_t { ProBlackLM = 0, ProBlueLM = 1 };
enum class Sentiment : std::uint8_t { Positive = 0, Negative = 1 };
enum class Role : std::uint8_t { Actor = 0, Target = 1 };

/// The eleven canonical entities; integer codes are stable (declaration order).
enum class AbstractEntity : std::uint8_t {
  BlackAmericans = 0,
  Police,
  Community,
  Racism,
  Democrats,
  Republicans,
  Government,
  WhiteAmericans,
  BlmMovement,
  Petition,
  Antifa,
};

inline constexpr int kNumStances = 2;
inline constexpr int kNumSentiments = 2;
inline constexpr int kNumRoles = 2;
inline constexpr int kNumEntities = 11;

inline constexpr std::array<Stance, 2> kAllStances{Stance::ProBlackLM, Stance::ProBlueLM};

constexpr int code(Stance s) { return static_cast<int>(s); }
constexpr int code(Sentiment s) { return static_cast<int>(s); }
constexpr int code(Role r) { return static_cast<int>(r); }
constexpr int code(AbstractEntity e) { return static_cast<int>(e); }

constexpr Stance opponent(Stance s) {
  return s == Stance::ProBlackLM ? Stance::ProBlueLM : Stance::ProBlackLM;
}

/// How an author portrays an entity: (abstract entity, sentiment, role).
struct Perspective {
  AbstractEntity entity{};
  Sentiment sentiment{};
  Role role{};

  friend constexpr auto operator<=>(const Perspective&, const Perspective&) = default;
};

// Serialized tokens: "pro_blacklm", "positive", "actor", "police", ...
std::string_view to_string(Stance s);
std::string_view to_string(Sentiment s);
std::string_view to_string(Role r);
std::string_view to_string(AbstractEntity e);

/// "police_negative_actor"
std::string to_string(const Perspective& p);

std::optional<Stance> parse_stance(std::string_view token);
std::optional<Sentiment> parse_sentiment(std::string_view token);
std::optional<Role> parse_role(std::string_view token);
std::optional<AbstractEntity> parse_entity(std::string_view token);

/// Entity from its integer code; throws std::out_of_range for codes outside 0..10.
AbstractEntity entity_from_code(int c);

}  // namespace perspectra
