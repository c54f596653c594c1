#include "bcl/corpus.hpp"

namespace bcl {

std::vector<CorpusEntry> default_corpus()
{
    std::vector<CorpusEntry> out;
    out.reserve(200);

    std::vector<std::pair<int, int>> combos; // (m, p), all 27 feasible scalar shapes
    for (int m = 1; m <= 6; ++m)
        for (int p = 0; p <= m; ++p)
            combos.emplace_back(m, p);

    for (int i = 0; i < 120; ++i) {
        auto [m, p] = combos[i % combos.size()];
        std::uint64_t seed = static_cast<std::uint64_t>(i + 1);
        CorpusEntry e{random_triple(1, 1, m, p, seed), CorpusKind::scalar_generic,
                      "scalar-m" + std::to_string(m) + "-p" + std::to_string(p) + "-s" +
                          std::to_string(seed),
                      false};
        out.push_back(std::move(e));
    }
    for (int i = 0; i < 50; ++i) {
        int m = 2 + (i % 5);          // m in 2..6
        int p = 1 + (i % (m - 1));    // interior p, so W1 and W2 are both proper
        std::uint64_t seed = 500 + i;
        CorpusEntry e{doubly_commuting_triple(m, p, seed), CorpusKind::scalar_dc,
                      "dc-m" + std::to_string(m) + "-p" + std::to_string(p) + "-s" +
                          std::to_string(seed),
                      true};
        out.push_back(std::move(e));
    }
    for (int i = 0; i < 20; ++i) {
        std::uint64_t seed = 600 + i;
        out.push_back(CorpusEntry{random_triple(1, 2, 4, 4, seed), CorpusKind::shape_1244,
                                  "m1244-s" + std::to_string(seed), false});
    }
    for (int i = 0; i < 10; ++i) {
        std::uint64_t seed = 700 + i;
        out.push_back(CorpusEntry{random_triple(2, 2, 3, 1, seed), CorpusKind::shape_2231,
                                  "m2231-s" + std::to_string(seed), false});
    }
    return out;
}

} // namespace bcl
