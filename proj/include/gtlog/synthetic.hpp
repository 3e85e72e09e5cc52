#pragma once

#include <cstdint>
#include <vector>

#include "gtlog/relation.hpp"

namespace gtlog {

struct TaxonomyFixture {
    /// T(subject, property, object); taxonomy edges use property "P171".
    Relation triples{"T", RelationSchema{3, {}, false}};
    /// L(id) = label for every taxon.
    Relation labels{"L", RelationSchema{1, {}, true}};
    std::vector<Value> interest;
    std::size_t taxon_edges = 0;
};

/// A forest of complete `branching`-ary trees holding half of the triples
/// as P171 edges, filler triples with other properties for the rest, and
/// `interest` distinct leaves drawn from the first tree.
TaxonomyFixture generate_taxonomy(std::size_t triples, std::size_t branching, std::size_t interest,
                                  std::uint64_t seed);

}  // namespace gtlog
