#pragma once

#include <array>

namespace freqlat {

struct Rgb {
    unsigned char r, g, b;
};

const std::array<Rgb, 256>& viridis_table();

} // namespace freqlat
