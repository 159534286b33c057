#pragma once

// Q-weight snapshot file:
//
//   DN-SARSA-W v1 K=<K>
//   <K rows of K space-separated decimals>
//
// Row = action (intention), column = state (CoS). Values use the shortest
// decimal form that parses back to the identical double.

#include <cstddef>
#include <iosfwd>
#include <string>

#include "dnsarsa/matrix.hpp"

namespace dnsarsa {

/// Shortest round-trip decimal for a double.
std::string format_double(double v);

void write_weights(std::ostream& os, const Matrix& w);
/// expected_k = 0 accepts any K. Throws ParseError (with line number) on a
/// malformed header, bad number, wrong row length or K mismatch.
Matrix read_weights(std::istream& is, std::size_t expected_k = 0);

void save_weights(const Matrix& w, const std::string& path);
Matrix load_weights(const std::string& path, std::size_t expected_k = 0);

}  // namespace dnsarsa
