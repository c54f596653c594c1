#pragma once

#include <string>
#include <vector>

#include "bcl/triple.hpp"

namespace bcl {

enum class CorpusKind { scalar_generic, scalar_dc, shape_1244, shape_2231 };

struct CorpusEntry {
    BclTriple triple;
    CorpusKind kind;
    std::string label;
    bool constructed_dc = false;
};

/// 200 seeded instances: 120 generic scalar triples cycling m in 1..6 and
/// p in 0..m, 50 constructed doubly commuting scalar triples, 20 of shape
/// (1,2,4,4) and 10 of shape (2,2,3,1).
std::vector<CorpusEntry> default_corpus();

} // namespace bcl
