#include "plantedcsp/clause_space.hpp"

#include <algorithm>

namespace plantedcsp {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > UINT64_MAX / a)
        throw std::overflow_error("tuple space size overflows 64 bits");
    return a * b;
}

void check_shape(std::int64_t n, std::int64_t ell) {
    if (n < 0 || ell < 0) throw std::invalid_argument("negative tuple shape");
    if (ell > n) throw std::invalid_argument("tuple length exceeds variable count");
}

}  // namespace

std::uint64_t count_tuples(std::int64_t n, std::int64_t ell) {
    check_shape(n, ell);
    std::uint64_t total = 1;
    for (std::int64_t i = 0; i < ell; ++i) {
        total = checked_mul(total, static_cast<std::uint64_t>(2 * (n - i)));
    }
    return total;
}

std::uint64_t count_var_tuples(std::int64_t n, std::int64_t ell) {
    check_shape(n, ell);
    std::uint64_t total = 1;
    for (std::int64_t i = 0; i < ell; ++i) {
        total = checked_mul(total, static_cast<std::uint64_t>(n - i));
    }
    return total;
}

TupleIndexer::TupleIndexer(std::int32_t n, std::int32_t ell)
    : n_(n), ell_(ell), size_(count_tuples(n, ell)) {}

std::uint64_t TupleIndexer::index(const Clause& clause) const {
    if (static_cast<std::int32_t>(clause.size()) != ell_)
        throw std::invalid_argument("clause length does not match indexer");
    std::uint64_t idx = 0;
    std::int32_t used[64];  // sorted variables seen so far; ell is tiny
    std::int32_t used_count = 0;
    for (std::int32_t i = 0; i < ell_; ++i) {
        const Literal lit = clause[static_cast<std::size_t>(i)];
        if (lit.variable < 0 || lit.variable >= n_)
            throw std::invalid_argument("variable out of range");
        // Rank of the variable among those not yet used.
        std::int32_t rank = lit.variable;
        for (std::int32_t j = 0; j < used_count; ++j) {
            if (used[j] == lit.variable) throw std::invalid_argument("repeated variable in clause");
            if (used[j] < lit.variable) --rank;
        }
        const auto radix = static_cast<std::uint64_t>(2 * (n_ - i));
        idx = idx * radix + 2 * static_cast<std::uint64_t>(rank) + (lit.negated ? 1 : 0);
        used[used_count++] = lit.variable;
    }
    return idx;
}

Clause TupleIndexer::unindex(std::uint64_t index) const {
    if (index >= size_) throw std::out_of_range("tuple index out of range");
    // Peel digits from least significant, then reverse.
    std::uint64_t digits[64];
    for (std::int32_t i = ell_ - 1; i >= 0; --i) {
        const auto radix = static_cast<std::uint64_t>(2 * (n_ - i));
        digits[i] = index % radix;
        index /= radix;
    }
    Clause clause(static_cast<std::size_t>(ell_));
    std::int32_t used[64];
    std::int32_t used_count = 0;
    for (std::int32_t i = 0; i < ell_; ++i) {
        auto rank = static_cast<std::int32_t>(digits[i] >> 1);
        // rank-th unused variable, with used[] kept sorted.
        std::int32_t var = rank;
        for (std::int32_t j = 0; j < used_count && used[j] <= var; ++j) ++var;
        std::int32_t pos = used_count;
        while (pos > 0 && used[pos - 1] > var) {
            used[pos] = used[pos - 1];
            --pos;
        }
        used[pos] = var;
        ++used_count;
        clause[static_cast<std::size_t>(i)] = Literal{var, (digits[i] & 1) != 0};
    }
    return clause;
}

VarTupleIndexer::VarTupleIndexer(std::int32_t n, std::int32_t ell)
    : n_(n), ell_(ell), size_(count_var_tuples(n, ell)) {}

std::uint64_t VarTupleIndexer::index(const std::vector<std::int32_t>& vars) const {
    if (static_cast<std::int32_t>(vars.size()) != ell_)
        throw std::invalid_argument("tuple length does not match indexer");
    std::uint64_t idx = 0;
    std::int32_t used[64];
    std::int32_t used_count = 0;
    for (std::int32_t i = 0; i < ell_; ++i) {
        const std::int32_t v = vars[static_cast<std::size_t>(i)];
        if (v < 0 || v >= n_) throw std::invalid_argument("variable out of range");
        std::int32_t rank = v;
        for (std::int32_t j = 0; j < used_count; ++j) {
            if (used[j] == v) throw std::invalid_argument("repeated variable in tuple");
            if (used[j] < v) --rank;
        }
        idx = idx * static_cast<std::uint64_t>(n_ - i) + static_cast<std::uint64_t>(rank);
        used[used_count++] = v;
    }
    return idx;
}

std::vector<std::int32_t> VarTupleIndexer::unindex(std::uint64_t index) const {
    if (index >= size_) throw std::out_of_range("tuple index out of range");
    std::uint64_t digits[64];
    for (std::int32_t i = ell_ - 1; i >= 0; --i) {
        const auto radix = static_cast<std::uint64_t>(n_ - i);
        digits[i] = index % radix;
        index /= radix;
    }
    std::vector<std::int32_t> vars(static_cast<std::size_t>(ell_));
    std::int32_t used[64];
    std::int32_t used_count = 0;
    for (std::int32_t i = 0; i < ell_; ++i) {
        std::int32_t var = static_cast<std::int32_t>(digits[i]);
        for (std::int32_t j = 0; j < used_count && used[j] <= var; ++j) ++var;
        std::int32_t pos = used_count;
        while (pos > 0 && used[pos - 1] > var) {
            used[pos] = used[pos - 1];
            --pos;
        }
        used[pos] = var;
        ++used_count;
        vars[static_cast<std::size_t>(i)] = var;
    }
    return vars;
}

std::uint32_t evaluate_pattern(const Assignment& sigma, const Clause& clause) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < clause.size(); ++i) {
        const Literal lit = clause[i];
        const bool is_true = (sigma[static_cast<std::size_t>(lit.variable)] == -1) != lit.negated;
        if (is_true) mask |= (1u << i);
    }
    return mask;
}

Clause restrict_clause(const Clause& clause, const std::vector<std::int32_t>& positions) {
    if (positions.empty()) throw std::invalid_argument("restriction set must be nonempty");
    Clause out;
    out.reserve(positions.size());
    std::int32_t prev = -1;
    for (const std::int32_t pos : positions) {
        if (pos <= prev) throw std::invalid_argument("positions must be strictly increasing");
        if (pos < 0 || pos >= static_cast<std::int32_t>(clause.size()))
            throw std::out_of_range("restriction position out of range");
        out.push_back(clause[static_cast<std::size_t>(pos)]);
        prev = pos;
    }
    return out;
}

bool clause_is_valid(const Clause& clause, std::int32_t n) {
    for (std::size_t i = 0; i < clause.size(); ++i) {
        const std::int32_t v = clause[i].variable;
        if (v < 0 || v >= n) return false;
        for (std::size_t j = 0; j < i; ++j)
            if (clause[j].variable == v) return false;
    }
    return true;
}

}  // namespace plantedcsp
