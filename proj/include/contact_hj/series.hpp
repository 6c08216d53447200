#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "contact_hj/errors.hpp"
#include "contact_hj/grid.hpp"

namespace contact_hj {

struct Sample {
  double t;
  double value;
};

/// Time series of a scalar diagnostic.
using Series = std::vector<Sample>;

inline void write_csv(const Series &s, const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("cannot open " + path + " for writing");
  os << "t,value\n";
  for (const auto &q : s)
    os << format_real(q.t) << ',' << format_real(q.value) << '\n';
}

} // namespace contact_hj
