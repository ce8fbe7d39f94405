#pragma once

// DIMACS CNF import/export. Variables are 1-based on disk and 0-based in
// memory; literal order within a clause is preserved (clauses are ordered
// tuples here, not sets). Output uses LF line endings and no comment lines,
// so export -> parse -> export reproduces the exact bytes.

#include <cstdint>
#include <string>

#include "plantedcsp/planting.hpp"

namespace plantedcsp {

struct DimacsInstance {
    std::int32_t n = 0;
    Formula formula;
};

// "p cnf <n> <m>" header followed by one "<lit> ... <lit> 0" line per clause.
std::string to_dimacs(const Formula& formula, std::int32_t n);

// Accepts leading "c" comment lines before the header. Validates the declared
// clause count, variable ranges, and distinct variables within each clause.
DimacsInstance parse_dimacs(const std::string& text);

void write_dimacs_file(const std::string& path, const Formula& formula, std::int32_t n);
DimacsInstance read_dimacs_file(const std::string& path);

}  // namespace plantedcsp
