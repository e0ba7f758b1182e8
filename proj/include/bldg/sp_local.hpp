#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bldg/errors.hpp"
#include "bldg/gfq.hpp"
#include "bldg/lattice.hpp"
#include "bldg/sl_local.hpp"
#include "bldg/spherical.hpp"

// Distance-one structure of the symplectic building Delta_n sitting inside
// Xi_{2n}.  V = K^{2n} carries the alternating form <x, y> = x^T J y with
// J = ((0, I_n), (-I_n, 0)); the basis is e_1..e_n, f_1..f_n with
// f_i = e_{n+i}.
//
// A lattice L is primitive when <L, L> = O and the induced form on L/piL is
// nondegenerate.  The special vertices of Delta_n are the classes with a
// primitive scaling (type 0) and their type-n mirrors; a chamber is a chain
// pi L_0 < L_1 < ... < L_n < L_0 with L_0 primitive and every
// <L_i, L_i> inside piO, encoded by the maximal isotropic flag
// L_i / pi L_0 of the residue space L_0 / pi L_0.
//
// Also here: apartment coordinates (a_1..a_n; b_1..b_n) for diagonal
// lattices, similitude-group elements with their coordinate action, and the
// lift of length-one Delta_n galleries to Xi_{2n} galleries.

namespace bldg::sp {

// Gram matrix of the standard form on K^{2n}, as a matrix over O.
lat::PolyMat standard_j_mat(unsigned q, int n);

// Minimum valuation of <x, y> over x, y in L.
int pairing_ord(const lat::Lattice& L);

// <L, L> = O with nondegenerate reduction; equivalent to pairing_ord 0
// together with det exponent 0.
bool is_primitive_lattice(const lat::Lattice& L);

// <L, L> contained in piO.
bool pairing_in_pi(const lat::Lattice& L);

// Some scaling of L is diagonal (a; mu - a) in a symplectic basis:
// <L, L> = pi^mu O and {x : <x, L> in O} = pi^{-mu} L.
bool is_special_lattice(const lat::Lattice& L);

// The unique scaling of the class representative with det exponent 0,
// checked primitive.  NotSpecial if the class has no primitive member.
lat::Lattice sp_primitive_rep(const lat::HomothetyClass& t, int n, unsigned q);

// Whether the class is a vertex of Delta_n: some representative L admits a
// primitive L0 with pi L0 <= L <= L0 and <L, L> inside piO (L = pi L0
// included).  Decided by enumerating the candidates between L and t^{-1}L.
bool class_in_delta(const lat::HomothetyClass& c, int n, unsigned q);

// Residue form of the pairing on the digit space of a window whose depths
// are all <= 1: entry (i, j) is <a_i, a_j> mod pi over the depth-1 adapted
// basis vectors.  DomainError (via GramForm validation) if degenerate.
gfq::GramForm residue_gram(const lat::Window& W);

// Diagonal lattice sum O t^{a_i} e_i + O t^{b_i} f_i in apartment
// coordinates; the class is unchanged by adding one constant to every a_i
// and b_i.
struct ApartmentVertex {
  std::string basis = "B";  // bookkeeping tag for the symplectic basis
  std::vector<int> a, b;
};

bool coords_is_primitive(const ApartmentVertex& v);  // a_i + b_i = 0
bool coords_is_special(const ApartmentVertex& v);    // a_i + b_i constant
int coords_type(const ApartmentVertex& v);           // sum mod 2n
bool coords_same_class(const ApartmentVertex& u, const ApartmentVertex& v);
// Vertex of Delta_n: the pair sums fit in {mu, mu + 1} for some mu, with
// odd mu when the spread is genuine.
bool coords_in_delta(const ApartmentVertex& v);

// Realization in the standard basis, and in an explicit column basis
// (columns scaled by t^bshift).
lat::Lattice realize_vertex(const ApartmentVertex& v, unsigned q);
lat::Lattice realize_vertex_in_basis(const lat::PolyMat& basis_cols,
                                     int bshift, const ApartmentVertex& v);

struct SpChamber {
  lat::HomothetyClass base;  // type-0 special class [L_0]
  gfq::Flag flag;            // isotropic flag of L_0 / pi L_0, dims 1..n

  std::string encode() const;
  bool operator==(const SpChamber& o) const {
    return base == o.base && flag.chain == o.flag.chain;
  }
  bool operator<(const SpChamber& o) const;
};

// The lattices L_1 < ... < L_n cut out by the flag, at the primitive
// representative's scaling.
std::vector<lat::Lattice> sp_chamber_chain(const SpChamber& c);

// Vertex classes [L_0], [L_1], ..., [L_n] of the chamber.
std::vector<lat::HomothetyClass> sp_chamber_vertices(const SpChamber& c);

// Validating constructor from an explicit chain: checks primitivity of L0,
// the chain indices, and <L_i, L_i> inside piO.  DomainError on violation.
SpChamber make_sp_chamber(const lat::Lattice& L0,
                          const std::vector<lat::Lattice>& chain);

// Base [O^{2n}] with chain L_j = (0^j, 1^{n-j}; 1^n).
SpChamber fundamental_chamber(int n, unsigned q);

// All chambers containing the type-0 special vertex t, one per maximal
// isotropic flag of L_0 / pi L_0.  NotSpecial, EnumerationTooLarge.
std::vector<SpChamber> sp_chambers_containing(const lat::HomothetyClass& t,
                                              int n, unsigned q);

// The q+1 chambers (including c) through the codimension-one face of c
// omitting vertex slot: 0 is the base [L_0], 1..n is [L_slot].
std::vector<SpChamber> sp_chambers_across(const SpChamber& c, int slot);

// prod_{m=1..n} (q^{2m} - 1)/(q - 1); chambers through a special vertex.
std::uint64_t r_delta_formula(int n, unsigned q);  // n >= 1
// ((q^{2n} - 1)/(q - 1)) * q; close special vertices.  n >= 2.
std::uint64_t omega_delta_formula(int n, unsigned q);
// Left cosets of Sp_n(O) in the close-vertex double coset; equals
// omega_delta_formula.  n >= 2.
std::uint64_t coset_count_sp(int n, unsigned q);

struct SpRelationReport {
  int n = 0;
  unsigned q = 2;
  std::uint64_t r_n = 0;    // chambers through a special vertex
  std::uint64_t r_nm1 = 0;  // gallery multiplicity between close vertices
  std::uint64_t omega = 0;  // close vertices
  std::uint64_t lhs = 0;    // q * r_n
  std::uint64_t rhs = 0;    // r_{n-1} * omega
  bool ok = false;
};

// Checks q * r(Delta_n) = r(Delta_{n-1}) * omega(Delta_n) from the closed
// formulas.  n >= 2.
SpRelationReport verify_sp_relation(int n, unsigned q);

// A close pair of type-0 special vertices with primitive representatives:
// [L + M : L] = q = [L + M : M].
struct SpClosePair {
  lat::HomothetyClass t, tp;
  lat::Lattice L, M;
};

// NotSpecial if t has no primitive representative; NotClose if tp does not
// or the index criterion fails.
SpClosePair make_sp_close_pair(const lat::HomothetyClass& t,
                               const lat::HomothetyClass& tp);

// L = O^{2n}, M = O t^{-1} e_1 + O e_2..e_n + O t f_1 + O f_2..f_n.
SpClosePair standard_sp_close_pair(int n, unsigned q);

// One admissible chain pi(L+M) = L_1 < L_2 < ... < L_n witnessing that the
// pair lies at gallery distance one: each <L_i, L_i> is inside piO and the
// chain completes to chambers over both L and M.  Built by greedy isotropic
// extension in (L cap M)/pi(L+M) and validated before returning.
std::vector<lat::Lattice> sp_witness_chain(const SpClosePair& p);

struct SpCloseSurvey {
  std::vector<lat::HomothetyClass> close;  // primitive classes, sorted
  std::uint64_t ambient = 0;      // lattice-distance candidates in Xi_{2n}
  std::uint64_t rejected_nonprimitive = 0;
  std::uint64_t rejected_type = 0;  // non-type-0 candidates (always 0)
};

// Candidates are the Xi_{2n}-close classes of t, filtered to those with a
// primitive representative; every accepted class is certified by a witness
// chain.  n >= 2.
SpCloseSurvey sp_close_survey(const lat::HomothetyClass& t, int n, unsigned q,
                              const lat::EnumOptions& opt = {});
std::vector<lat::HomothetyClass> sp_close_vertices(
    const lat::HomothetyClass& t, int n, unsigned q,
    const lat::EnumOptions& opt = {});

// Number of chains L_2 < ... < L_n between L_1 = pi(L+M) and L cap M with
// every <L_i, L_i> inside piO: the maximal isotropic flags of the residue
// space (L cap M)/pi(L+M) of dimension 2(n-1).
std::uint64_t sp_gallery_multiplicity(const SpClosePair& p);

struct SpCloseComplex {
  sph::Complex complex;     // classes strictly between pi(L+M) and L cap M
  sph::VertexMap to_flags;  // into build_C_building(n-1, q)
};

// The complex of classes [N] with pi(L+M) < N < L cap M and <N, N> inside
// piO, with simplices the chains; the vertex map sends [N] to its digit
// subspace rewritten in a symplectic basis of the residue form.
SpCloseComplex sp_close_complex(const SpClosePair& p);

// Element of GSp_n(K) stored as t^mshift * mat with mat over O; nu is the
// O-part of the similitude scalar, so ord(nu(g)) = nu_ord = 2*mshift +
// val(nu).
struct GspElement {
  lat::PolyMat mat;
  int mshift = 0;
  lat::Poly nu;
  int nu_ord = 0;
  int n = 0;  // half rank
};

// Validates mat^T J mat = nu J with nu != 0; DomainError otherwise.
GspElement make_gsp(const lat::PolyMat& mat, int mshift = 0);

GspElement gsp_scalar(unsigned q, int n, int u);        // t^u, nu = t^{2u}
GspElement gsp_eta(unsigned q, int n);                  // e_i -> f_i -> t e_i
GspElement gsp_diag(unsigned q, const std::vector<int>& s);  // (t^s; t^{-s})
// Symplectic transvection x -> x + c <x, v> v over O.
GspElement gsp_transvection(unsigned q, int n, const std::vector<lat::Poly>& v,
                            const lat::Poly& c);
GspElement gsp_mul(const GspElement& g, const GspElement& h);

int gsp_det_ord(const GspElement& g);  // n * nu_ord

lat::Lattice gsp_apply(const GspElement& g, const lat::Lattice& L);

// Columns of the twisted basis B_g = {nu^{-1} g u_i, g w_i} and its scale.
std::pair<lat::PolyMat, int> gsp_basis_matrix(const GspElement& g);

// Coordinate action gL = (a + m; b) in the basis B_g, m = ord(nu(g)).
ApartmentVertex gsp_act(const GspElement& g, const ApartmentVertex& v);

// Whether g moves the vertex to a vertex of Delta_n; with odd m exactly the
// special vertices stay inside.
bool gsp_image_in_delta(const GspElement& g, const ApartmentVertex& v);

// Image chamber of c under g.  For even ord(nu) = 2r the chain maps through
// pi^{-r} g; for odd 2r + 1 the chamber is re-based at the type-n vertex:
// the chain is completed to a Xi_{2n} chain L_{n+1} < ... < L_{2n-1} and the
// image has base pi^{-(r+1)} g L_n with chain pi^{-r} g L_{n+j}, pi^{-r} g L_0.
SpChamber gsp_act_chamber(const GspElement& g, const SpChamber& c);

// A similitude carrying the special vertex v to the special vertex w,
// assembled from a diagonal element, a scalar, and (for a parity flip) eta.
// DomainError unless both inputs are special.
GspElement transitivity_witness(const ApartmentVertex& v,
                                const ApartmentVertex& w, unsigned q);

// Lift of a length-one gallery C, C' in the standard apartment of Delta_n
// to an adjacent pair of Xi_{2n} chambers D containing C and D' containing
// C'; C = C' yields D = D'.  All chain lattices must be diagonal
// (NotInCommonApartment); the chambers must share all but one vertex
// (NotAdjacent).
std::pair<sl::SLChamber, sl::SLChamber> lift_gallery(const SpChamber& C,
                                                     const SpChamber& Cp);

}  // namespace bldg::sp
