#pragma once

#include <string_view>

namespace mbhoming {

// Category attached to a view during learning: where the nest was relative
// to the heading at the time the view was seen.
enum class TeachingSignal { Left, Right, Nest };

inline constexpr std::string_view to_string(TeachingSignal s) {
    switch (s) {
    case TeachingSignal::Left: return "left";
    case TeachingSignal::Right: return "right";
    case TeachingSignal::Nest: return "nest";
    }
    return "?";
}

} // namespace mbhoming
