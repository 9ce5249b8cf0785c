#ifndef SVGOF_VERSION_HPP
#define SVGOF_VERSION_HPP

namespace svgof {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // SVGOF_VERSION_HPP
