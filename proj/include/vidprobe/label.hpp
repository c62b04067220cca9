#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "vidprobe/error.hpp"

namespace vidprobe {

/// Class index mapping shared by the store format and the probe: 0 = Real, 1 = Fake.
enum class ClassLabel : std::uint8_t { Real = 0, Fake = 1 };

inline constexpr std::size_t class_index(ClassLabel l) { return static_cast<std::size_t>(l); }

inline constexpr ClassLabel other(ClassLabel l) {
  return l == ClassLabel::Real ? ClassLabel::Fake : ClassLabel::Real;
}

inline std::string_view label_name(ClassLabel l) { return l == ClassLabel::Real ? "real" : "fake"; }

inline ClassLabel parse_label(std::string_view s) {
  if (s == "real" || s == "Real") return ClassLabel::Real;
  if (s == "fake" || s == "Fake") return ClassLabel::Fake;
  throw Error(ErrorCode::InvalidArgument, "class label must be \"real\" or \"fake\", got \"" + std::string(s) + "\"");
}

}  // namespace vidprobe
