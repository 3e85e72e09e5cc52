#include "gtlog/synthetic.hpp"

#include <algorithm>
#include <random>

namespace gtlog {

TaxonomyFixture generate_taxonomy(std::size_t triples, std::size_t branching, std::size_t interest,
                                  std::uint64_t seed) {
    branching = std::max<std::size_t>(branching, 1);
    std::mt19937_64 rng(seed);
    TaxonomyFixture out;
    const std::size_t budget = triples / 2;

    // Deepest complete tree that still leaves room for at least four trees.
    std::size_t depth = 1, size = 1 + branching;
    for (std::size_t level = branching;;) {
        std::size_t next_level = level * branching;
        if (size + next_level > std::max<std::size_t>(budget / 4, 1 + branching)) break;
        level = next_level;
        size += level;
        ++depth;
    }

    auto name = [](std::size_t n) { return "Q" + std::to_string(n); };
    std::vector<Tuple> rows;
    std::vector<Tuple> labels;
    rows.reserve(triples);
    std::size_t next_id = 1;
    std::vector<std::size_t> first_tree_leaves;
    for (std::size_t tree = 0; out.taxon_edges < budget; ++tree) {
        std::size_t root = next_id++;
        labels.push_back({name(root), "taxon " + std::to_string(root)});
        std::vector<std::size_t> level{root};
        for (std::size_t d = 0; d < depth && out.taxon_edges < budget; ++d) {
            std::vector<std::size_t> children;
            for (std::size_t parent : level) {
                for (std::size_t b = 0; b < branching && out.taxon_edges < budget; ++b) {
                    std::size_t child = next_id++;
                    rows.push_back({name(child), "P171", name(parent)});
                    labels.push_back({name(child), "taxon " + std::to_string(child)});
                    children.push_back(child);
                    ++out.taxon_edges;
                }
            }
            level = std::move(children);
        }
        if (tree == 0) first_tree_leaves = level;
    }
    const std::size_t nodes = next_id - 1;
    std::uniform_int_distribution<std::size_t> pick(1, nodes);
    for (std::size_t i = 0; rows.size() < triples; ++i) {
        rows.push_back({name(1 + i % nodes), "P" + std::to_string(1000 + i / nodes), name(pick(rng))});
    }
    std::shuffle(first_tree_leaves.begin(), first_tree_leaves.end(), rng);
    first_tree_leaves.resize(std::min(interest, first_tree_leaves.size()));
    for (std::size_t leaf : first_tree_leaves) out.interest.push_back(Value(name(leaf)));
    out.triples = Relation("T", RelationSchema{3, {}, false}, std::move(rows));
    out.labels = Relation("L", RelationSchema{1, {}, true}, std::move(labels));
    return out;
}

}  // namespace gtlog
