#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bldg/errors.hpp"
#include "bldg/gfq.hpp"
#include "bldg/lattice.hpp"
#include "bldg/spherical.hpp"

// Distance-one structure of the affine building of SL_n over k((t)) around
// a vertex: the chambers through a vertex, the close vertices (graph
// distance two, reachable by a single gallery step), gallery multiplicities
// between close vertices, and the complex spanned by the lattice classes
// squeezed between a close pair.
//
// Vertices are homothety classes of lattices.  A chamber containing [L] is
// a chain pi L < L_1 < ... < L_{n-1} < L with every successive index q; it
// is stored as the complete flag L_i / pi L in the n-dimensional quotient
// L / pi L.

namespace bldg::sl {

struct SLChamber {
  lat::HomothetyClass base;  // [L]
  gfq::Flag flag;            // complete flag of L/piL in window digit coords

  std::string encode() const;
  bool operator==(const SLChamber& o) const {
    return base == o.base && flag.chain == o.flag.chain;
  }
  bool operator<(const SLChamber& o) const;
};

// The lattices L_1 < ... < L_{n-1} strictly between pi L and L cut out by
// the chamber's flag, each at base's scaling.
std::vector<lat::Lattice> chamber_chain(const SLChamber& c);

lat::HomothetyClass standard_vertex(unsigned q, int n);

// All chambers containing the vertex, one per complete flag of L/piL.
// DomainError unless n matches the class and n >= 2.
std::vector<SLChamber> chambers_containing_vertex(const lat::HomothetyClass& t,
                                                  int n, unsigned q);

// All classes [M] != [L] admitting representatives with [L : L cap M] = q
// and [L + M : L] = q, sorted.  Candidates are read off the quotient
// t^{-1}L / tL: M corresponds to an n-dimensional submodule meeting the
// image of L in dimension n-1, so the enumeration produces exactly the
// close vertices with no rejected candidates.  dim/bottom_dim in opt are
// ignored; cap and threads are honored.  n >= 3.
std::vector<lat::HomothetyClass> close_vertices(const lat::HomothetyClass& t,
                                                int n, unsigned q,
                                                const lat::EnumOptions& opt = {});

// ((q^n - 1)/(q - 1)) * ((q^{n-1} - 1)/(q - 1)) * q, the close-vertex count.
std::uint64_t omega_formula(int n, unsigned q);

struct RelationReport {
  int n = 0;
  unsigned q = 2;
  std::uint64_t r_n = 0;    // chambers through a vertex
  std::uint64_t r_nm2 = 0;  // gallery multiplicity between close vertices
  std::uint64_t omega = 0;  // close vertices
  std::uint64_t lhs = 0;    // q * r_n
  std::uint64_t rhs = 0;    // r_{n-2} * omega
  bool ok = false;
};

// Checks q * r_n = r_{n-2} * omega_n from the closed formulas.  n >= 3.
RelationReport verify_sl_relation(int n, unsigned q);

// A close pair with its canonical representatives: L is the shift-0
// representative of t and M is the unique scaling of a representative of
// t' with [L : L cap M] = q and [L + M : L] = q.
struct ClosePair {
  lat::HomothetyClass t, tp;
  lat::Lattice L, M;
};

// NotClose if no scaling satisfies the index criterion (or t = t').
ClosePair make_close_pair(const lat::HomothetyClass& t,
                          const lat::HomothetyClass& tp);

// L = O^n, M = O t^{-1} e_1 + O e_2 + ... + O e_{n-1} + O t e_n.
ClosePair standard_close_pair(int n, unsigned q);

// Number of chains L_2 < ... < L_{n-2} strictly between pi(L+M) and
// L cap M, counted by enumerating complete flags of the (n-2)-dimensional
// quotient (L cap M) / pi(L+M).  Equals the flag count of k^{n-2}.
std::uint64_t gallery_multiplicity(const ClosePair& p);

struct CloseComplex {
  sph::Complex complex;      // classes strictly between pi(L+M) and L cap M
  sph::VertexMap to_flags;   // into build_A_building(n-3, q)
};

// The complex of lattice classes [N] with pi(L+M) < N < L cap M, with
// simplices the chains, together with the vertex map [N] -> N / pi(L+M)
// into the flag complex of k^{n-2}.  Empty for n = 3.
CloseComplex close_complex(const ClosePair& p);

// The q+1 chambers (including c) sharing the codimension-one face of c
// that omits vertex slot: slot 0 is the base class [L], slot i in
// 1..n-1 is [L_i].
std::vector<SLChamber> chambers_across(const SLChamber& c, int slot);

// Galleries of length one starting at a chamber containing t and ending at
// a chamber not containing t, by direct enumeration: each of the r_n
// chambers admits exactly q neighbors across the face omitting t.  The
// total is r_n * q.
std::uint64_t count_galleries_from(const lat::HomothetyClass& t, int n,
                                   unsigned q);

// Whether two distinct classes share a simplex: some scalings satisfy
// pi A < B' < A, i.e. the relative position has max - min = 1.
bool vertices_adjacent(const lat::HomothetyClass& a,
                       const lat::HomothetyClass& b);

}  // namespace bldg::sl
