#include "plantedcsp/dimacs.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace plantedcsp {

std::string to_dimacs(const Formula& formula, std::int32_t n) {
    if (n < 1) throw std::invalid_argument("DIMACS needs at least one variable");
    std::string out = "p cnf " + std::to_string(n) + " " + std::to_string(formula.size()) + "\n";
    for (const Clause& clause : formula) {
        if (!clause_is_valid(clause, n))
            throw std::invalid_argument("clause outside the declared variable range");
        for (const Literal lit : clause) {
            const std::int32_t v = lit.variable + 1;
            out += std::to_string(lit.negated ? -v : v);
            out += ' ';
        }
        out += "0\n";
    }
    return out;
}

DimacsInstance parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::int32_t n = -1;
    std::size_t declared = 0;
    // Header, preceded by optional comments.
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == 'c') continue;
        std::istringstream header(line);
        std::string p, cnf;
        if (!(header >> p >> cnf >> n >> declared) || p != "p" || cnf != "cnf" || n < 1)
            throw std::invalid_argument("malformed DIMACS header");
        break;
    }
    if (n < 1) throw std::invalid_argument("missing DIMACS header");

    DimacsInstance instance;
    instance.n = n;
    Clause current;
    std::int64_t token = 0;
    // Clause bodies: whitespace-separated integers, 0 terminates a clause.
    std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::istringstream body(rest);
    while (body >> token) {
        if (token == 0) {
            if (current.empty()) throw std::invalid_argument("empty clause in DIMACS body");
            instance.formula.push_back(current);
            current.clear();
            continue;
        }
        if (token > n || token < -static_cast<std::int64_t>(n))
            throw std::invalid_argument("literal outside declared variable range");
        const auto v = static_cast<std::int32_t>(token < 0 ? -token : token);
        current.push_back(Literal{v - 1, token < 0});
    }
    if (!current.empty()) throw std::invalid_argument("unterminated clause in DIMACS body");
    if (instance.formula.size() != declared)
        throw std::invalid_argument("clause count does not match header");
    for (const Clause& clause : instance.formula)
        if (!clause_is_valid(clause, n))
            throw std::invalid_argument("repeated variable within a clause");
    return instance;
}

void write_dimacs_file(const std::string& path, const Formula& formula, std::int32_t n) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << to_dimacs(formula, n);
}

DimacsInstance read_dimacs_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dimacs(buffer.str());
}

}  // namespace plantedcsp
