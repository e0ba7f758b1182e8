#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bldg/errors.hpp"
#include "bldg/gfq.hpp"

// Finite spherical buildings as explicit simplicial complexes.
//
// A complex is stored facet-list style: labeled vertices plus the list of
// maximal simplices (chambers).  Every subset of a facet is implicitly a
// simplex.  Complexes built here are immutable once returned.

namespace bldg::sph {

struct Complex {
  std::vector<std::string> labels;       // canonical, pairwise distinct
  std::vector<std::vector<int>> facets;  // sorted index sets, sorted lex

  int vertex_count() const { return static_cast<int>(labels.size()); }
  std::uint64_t chamber_count() const { return facets.size(); }

  bool operator==(const Complex& o) const {
    return labels == o.labels && facets == o.facets;
  }
};

// Validates and canonicalizes: facet members sorted, facet list sorted and
// duplicate-free, no facet inside another, every vertex on some facet,
// labels distinct.  DomainError on any violation.
Complex make_complex(std::vector<std::string> labels,
                     std::vector<std::vector<int>> facets);

// Flag complex of k^{m+1}: vertices are the proper nontrivial subspaces,
// chambers the complete flags.  m = 0 gives the empty complex.
Complex build_A_building(int m, unsigned q);

// Isotropic-flag complex of symplectic k^{2m}: vertices the nonzero totally
// isotropic subspaces, chambers the maximal isotropic flags.  m >= 1.
Complex build_C_building(int m, unsigned q);

// Number of facets containing the given face (vertex-index set, any order).
// The empty face lies in every chamber.  FaceNotInComplex if the face is
// not a simplex.
std::uint64_t chambers_containing(const std::vector<int>& face,
                                  const Complex& C);

// A vertex-to-vertex assignment between two complexes.
struct VertexMap {
  Complex domain, codomain;
  std::vector<int> map;  // domain index -> codomain index, total
};

// True iff f is a vertex bijection carrying facets exactly onto facets.
// On failure fills *witness (if given) with a counterexample: a collapsed
// vertex pair, or the domain facet whose image is not a facet; empty when
// only the vertex or facet counts disagree.
bool verify_simplicial_iso(const VertexMap& f,
                           std::vector<int>* witness = nullptr);

}  // namespace bldg::sph
