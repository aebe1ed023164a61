#ifndef CGP_VERSION_HPP
#define CGP_VERSION_HPP

namespace cgp {

inline constexpr const char* kVersion = "cgp 1.0.0";

}

#endif
