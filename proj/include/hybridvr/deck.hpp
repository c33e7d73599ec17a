#ifndef HYBRIDVR_DECK_HPP
#define HYBRIDVR_DECK_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "hybridvr/problem_model.hpp"

namespace hybridvr {

// Deck files are JSON objects with the top-level keys
//
//   name       optional string
//   groups     {"count": G}
//   mesh       {nx, ny, x_min, x_max, y_min, y_max,
//               boundary: {west, east, south, north}}   ("vacuum"|"reflective")
//   materials  [{name, sigma_t: [G], sigma_s: [G][G]}]  (row g holds g -> g')
//   cell_map   [nx*ny] material indices, row-major from the south row
//   sources    [{kind: "cell_region"|"point_in_cell", spectrum: [G], strength,
//                and one of cells: [[i, j], ...], bbox: [x0, x1, y0, y1],
//                point: [x, y]}]
//   detectors  [{name?, sigma_d: [G], and one of cells or bbox}]
//
// A bbox selects every cell whose center lies inside it (inclusive).
// Unknown keys anywhere are rejected.

// Throws ParseError for malformed input and ValidationError for invalid
// content.
ProblemModel parse_deck(std::string_view text);
ProblemModel load_deck(const std::filesystem::path& path);

// Serializes a model so that parse_deck(deck_to_string(m)) == m.
std::string deck_to_string(const ProblemModel& model);
void write_deck(const ProblemModel& model, const std::filesystem::path& path);

}  // namespace hybridvr

#endif  // HYBRIDVR_DECK_HPP
