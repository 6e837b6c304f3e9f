#pragma once

#include <string>

#include "goalrec/gridmap.hpp"

namespace testutil {

inline std::string data(const std::string& name) { return std::string(GOALREC_TEST_DATA) + "/" + name; }

inline std::string map_text(int w, int h, const std::string& body) {
  return "type octile\nheight " + std::to_string(h) + "\nwidth " + std::to_string(w) + "\nmap\n" + body;
}

inline goalrec::gridmap::OccupancyGrid free_map(int n = 32) {
  std::string body;
  for (int r = 0; r < n; ++r) body += std::string(n, '.') + "\n";
  return goalrec::gridmap::parse_map(map_text(n, n, body));
}

}  // namespace testutil
