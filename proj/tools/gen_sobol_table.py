#!/usr/bin/env python3
"""Regenerates include/spmo/detail/sobol_table.hpp from the Joe-Kuo
(new-joe-kuo-6.21201) direction numbers shipped with SciPy."""
import os
import sys

import numpy as np
import scipy

DIMS = int(sys.argv[1]) if len(sys.argv) > 1 else 128

data = np.load(os.path.join(os.path.dirname(scipy.__file__), "stats", "_sobol_direction_numbers.npz"))
poly = data["poly"][:DIMS]
vinit = data["vinit"][:DIMS]

out = []
out.append("#pragma once")
out.append("")
out.append("// Generated by tools/gen_sobol_table.py. Joe-Kuo direction numbers")
out.append("// (new-joe-kuo-6.21201); entry 0 is the van der Corput dimension.")
out.append("")
out.append("#include <array>")
out.append("#include <cstdint>")
out.append("")
out.append("namespace spmo::detail {")
out.append("")
out.append("struct SobolDirection {")
out.append("  std::uint32_t degree;")
out.append("  std::uint32_t coeffs;")
out.append("  std::array<std::uint32_t, 18> m;")
out.append("};")
out.append("")
out.append(f"inline constexpr std::size_t kSobolMaxDim = {DIMS};")
out.append("")
out.append(f"inline constexpr std::array<SobolDirection, {DIMS}> kSobolTable{{{{")
for p, v in zip(poly, vinit):
    p = int(p)
    deg = p.bit_length() - 1
    coeffs = (p >> 1) & ((1 << max(deg - 1, 0)) - 1) if deg > 0 else 0
    ms = ", ".join(str(int(x)) for x in v)
    out.append(f"    {{{deg}, {coeffs}, {{{ms}}}}},")
out.append("}};")
out.append("")
out.append("}  // namespace spmo::detail")
out.append("")

path = os.path.join(os.path.dirname(__file__), "..", "include", "spmo", "detail", "sobol_table.hpp")
with open(path, "w") as f:
    f.write("\n".join(out))
