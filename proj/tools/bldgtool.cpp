// bldgtool: batch front end for the exact local-structure library.
//
// Subcommands count, enumerate, verify, and export; every run prints one
// machine-readable document on stdout (JSON by default, CSV for `table`,
// DOT for `export-complex --format dot`) and nothing else there.  Wall
// time goes to stderr so reports stay byte-identical across runs and
// across --threads settings.
//
// Exit codes: 0 all requested checks passed, 1 a verification mismatched
// (the report carries the first counterexample), 2 the job is invalid or
// outside the feasibility envelope.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bldg/common.hpp"
#include "bldg/gfq.hpp"
#include "bldg/lattice.hpp"
#include "bldg/sl_local.hpp"
#include "bldg/sp_local.hpp"
#include "bldg/spherical.hpp"

namespace lat = bldg::lat;
namespace gfq = bldg::gfq;
namespace sph = bldg::sph;
namespace sl = bldg::sl;
namespace sp = bldg::sp;

using json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

struct Job {
  std::string command;
  std::string family;  // sl | sp (table also accepts both)
  int n = 0;
  unsigned q = 2;
  std::string format;  // resolved per command
  int threads = 1;
  int precision = lat::kWorkPrec;
  unsigned seed = 17;
  int pairs = 20;
  bool all_pairs = false;
  bool slow = false;
  bool force = false;
  bool inject_fault = false;  // test hook: perturb the first computed count
  int n_min = 0, n_max = -1;  // table range; n_max < n_min selects defaults
  bool range_given = false;
};

// Thrown for invalid or oversized jobs; mapped to exit 2.
struct Infeasible {
  std::string why;
};

// Documented enumeration envelope.  Everything inside `enum_ok` can be
// enumerated on a laptop; the starred sizes are gated behind --slow.
bool enum_ok(const std::string& fam, int n, unsigned q) {
  if (fam == "sl") return (q == 2 && n <= 5) || (q == 3 && n <= 4);
  return (q == 2 && n <= 3) || (q == 3 && n <= 2);
}

bool slow_tier(const std::string& fam, int n, unsigned q) {
  if (fam == "sl") return (n == 5 && q == 2) || (n == 4 && q == 3);
  return n == 3 && q == 2;
}

// Gate for commands that must enumerate.  --force attempts any size (the
// library's own caps still apply); --slow unlocks the starred sizes.
void require_enumerable(const Job& j) {
  if (j.force) return;
  if (!enum_ok(j.family, j.n, j.q))
    throw Infeasible{"(" + j.family + ", n=" + std::to_string(j.n) +
                     ", q=" + std::to_string(j.q) +
                     ") is outside the enumeration envelope; pass --force to "
                     "attempt it anyway"};
  if (slow_tier(j.family, j.n, j.q) && !j.slow)
    throw Infeasible{"(" + j.family + ", n=" + std::to_string(j.n) +
                     ", q=" + std::to_string(j.q) +
                     ") is in the slow tier; pass --slow to run it"};
}

// Whether verify-relation should enumerate in addition to the formulas.
bool relation_enumerable(const Job& j) {
  if (!enum_ok(j.family, j.n, j.q)) return j.force;
  if (slow_tier(j.family, j.n, j.q)) return j.slow || j.force;
  return true;
}

// Consumes the fault flag: the first count routed through here in a run
// comes back perturbed when --inject-fault is set.
std::uint64_t bump(Job& j, std::uint64_t v) {
  if (!j.inject_fault) return v;
  j.inject_fault = false;
  return v + 1;
}

json header(const Job& j) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = j.command;
  doc["family"] = j.family;
  doc["n"] = j.n;
  doc["q"] = j.q;
  doc["precision"] = lat::kWorkPrec;
  return doc;
}

void emit(const json& doc) { std::cout << doc.dump(2) << "\n"; }

lat::EnumOptions enum_opts(const Job& j) {
  lat::EnumOptions opt;
  opt.threads = j.threads;
  return opt;
}

lat::HomothetyClass base_vertex(const Job& j) {
  int dim = j.family == "sl" ? j.n : 2 * j.n;
  return sl::standard_vertex(j.q, dim);
}

// ---------------------------------------------------------------- commands

int cmd_count_chambers(Job j) {
  require_enumerable(j);
  std::uint64_t formula, enumerated;
  if (j.family == "sl") {
    if (j.n < 2) throw Infeasible{"sl chambers need n >= 2"};
    formula = gfq::complete_flag_count(j.n, j.q);
    enumerated = sl::chambers_containing_vertex(base_vertex(j), j.n, j.q).size();
  } else {
    if (j.n < 1) throw Infeasible{"sp chambers need n >= 1"};
    formula = sp::r_delta_formula(j.n, j.q);
    enumerated = sp::sp_chambers_containing(base_vertex(j), j.n, j.q).size();
  }
  enumerated = bump(j, enumerated);
  json doc = header(j);
  doc["formula"] = formula;
  doc["enumerated"] = enumerated;
  doc["match"] = formula == enumerated;
  doc["ok"] = formula == enumerated;
  if (formula != enumerated)
    doc["counterexample"] = {{"quantity", "chamber count"},
                             {"formula", formula},
                             {"enumerated", enumerated}};
  emit(doc);
  return formula == enumerated ? 0 : 1;
}

int cmd_count_close(Job j) {
  require_enumerable(j);
  std::uint64_t formula, enumerated;
  json cards;
  if (j.family == "sl") {
    if (j.n < 3) throw Infeasible{"sl close vertices need n >= 3"};
    formula = sl::omega_formula(j.n, j.q);
    auto close = sl::close_vertices(base_vertex(j), j.n, j.q, enum_opts(j));
    enumerated = close.size();
    cards["candidates"] = enumerated;  // every candidate is accepted
  } else {
    if (j.n < 2) throw Infeasible{"sp close vertices need n >= 2"};
    formula = sp::omega_delta_formula(j.n, j.q);
    auto survey = sp::sp_close_survey(base_vertex(j), j.n, j.q, enum_opts(j));
    enumerated = survey.close.size();
    cards["ambient"] = survey.ambient;
    cards["rejected_nonprimitive"] = survey.rejected_nonprimitive;
    cards["rejected_type"] = survey.rejected_type;
  }
  enumerated = bump(j, enumerated);
  json doc = header(j);
  doc["formula"] = formula;
  doc["enumerated"] = enumerated;
  doc["match"] = formula == enumerated;
  doc["cardinalities"] = cards;
  doc["ok"] = formula == enumerated;
  if (formula != enumerated)
    doc["counterexample"] = {{"quantity", "close vertex count"},
                             {"formula", formula},
                             {"enumerated", enumerated}};
  emit(doc);
  return formula == enumerated ? 0 : 1;
}

int cmd_multiplicity(Job j) {
  require_enumerable(j);
  std::uint64_t expected, r;
  if (j.family == "sl") {
    if (j.n < 3) throw Infeasible{"sl multiplicity needs n >= 3"};
    expected = gfq::complete_flag_count(j.n - 2, j.q);
    r = gfq::complete_flag_count(j.n, j.q);
  } else {
    if (j.n < 2) throw Infeasible{"sp multiplicity needs n >= 2"};
    expected = sp::r_delta_formula(j.n - 1, j.q);
    r = sp::r_delta_formula(j.n, j.q);
  }
  auto t = base_vertex(j);
  std::vector<lat::HomothetyClass> close =
      j.family == "sl"
          ? sl::close_vertices(t, j.n, j.q, enum_opts(j))
          : sp::sp_close_vertices(t, j.n, j.q, enum_opts(j));

  auto one = [&](const lat::HomothetyClass& tp) -> std::uint64_t {
    if (j.family == "sl")
      return sl::gallery_multiplicity(sl::make_close_pair(t, tp));
    return sp::sp_gallery_multiplicity(sp::make_sp_close_pair(t, tp));
  };

  json doc = header(j);
  doc["expected"] = expected;

  if (j.all_pairs) {
    doc["mode"] = "all";
    int parts = static_cast<int>(close.size());
    auto sums = bldg::run_partitioned<std::uint64_t>(
        parts, j.threads,
        [&](int i) { return one(close[static_cast<size_t>(i)]); });
    std::uint64_t sum = 0;
    bool each_ok = true;
    json bad;
    for (size_t i = 0; i < sums.size(); ++i) {
      sum = bldg::checked_add(sum, sums[i]);
      if (sums[i] != expected && each_ok) {
        each_ok = false;
        bad = {{"vertex", close[i].encode()},
               {"multiplicity", sums[i]},
               {"expected", expected}};
      }
    }
    sum = bump(j, sum);
    std::uint64_t want = bldg::checked_mul(r, j.q);
    doc["pairs"] = close.size();
    doc["sum"] = sum;
    doc["sum_expected"] = want;
    bool ok = each_ok && sum == want;
    doc["ok"] = ok;
    if (!ok)
      doc["counterexample"] =
          !each_ok ? bad
                   : json{{"quantity", "multiplicity sum"},
                          {"enumerated", sum},
                          {"expected", want}};
    emit(doc);
    return ok ? 0 : 1;
  }

  doc["mode"] = "sample";
  doc["seed"] = j.seed;
  size_t k = std::min<size_t>(static_cast<size_t>(j.pairs), close.size());
  std::vector<size_t> idx(close.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::mt19937 rng(j.seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);

  auto mults = bldg::run_partitioned<std::uint64_t>(
      static_cast<int>(k), j.threads,
      [&](int i) { return one(close[idx[static_cast<size_t>(i)]]); });
  if (!mults.empty()) mults[0] = bump(j, mults[0]);

  json samples = json::array();
  bool ok = true;
  json bad;
  for (size_t i = 0; i < k; ++i) {
    samples.push_back({{"vertex", close[idx[i]].encode()},
                       {"multiplicity", mults[i]}});
    if (mults[i] != expected && ok) {
      ok = false;
      bad = {{"vertex", close[idx[i]].encode()},
             {"multiplicity", mults[i]},
             {"expected", expected}};
    }
  }
  doc["pairs"] = k;
  doc["samples"] = samples;
  doc["ok"] = ok;
  if (!ok) doc["counterexample"] = bad;
  emit(doc);
  return ok ? 0 : 1;
}

int cmd_verify_relation(Job j) {
  json doc = header(j);
  std::uint64_t fr, fm, fo, lhs, rhs;
  bool holds;
  if (j.family == "sl") {
    if (j.n < 3) throw Infeasible{"sl relation needs n >= 3"};
    auto rep = sl::verify_sl_relation(j.n, j.q);
    fr = rep.r_n, fm = rep.r_nm2, fo = rep.omega;
    lhs = rep.lhs, rhs = rep.rhs, holds = rep.ok;
  } else {
    if (j.n < 2) throw Infeasible{"sp relation needs n >= 2"};
    auto rep = sp::verify_sp_relation(j.n, j.q);
    fr = rep.r_n, fm = rep.r_nm1, fo = rep.omega;
    lhs = rep.lhs, rhs = rep.rhs, holds = rep.ok;
  }
  doc["formula"] = fo;
  doc["components"] = {{"r", fr},
                       {"m", fm},
                       {"omega", fo},
                       {"q_times_r", lhs},
                       {"m_times_omega", rhs}};

  bool ok = holds;
  json counterexample;
  if (!holds)
    counterexample = {{"quantity", "relation"}, {"lhs", lhs}, {"rhs", rhs}};

  if (relation_enumerable(j)) {
    auto t = base_vertex(j);
    std::uint64_t er, eo, em;
    if (j.family == "sl") {
      er = sl::chambers_containing_vertex(t, j.n, j.q).size();
      eo = sl::close_vertices(t, j.n, j.q, enum_opts(j)).size();
      em = sl::gallery_multiplicity(sl::standard_close_pair(j.n, j.q));
    } else {
      er = sp::sp_chambers_containing(t, j.n, j.q).size();
      eo = sp::sp_close_vertices(t, j.n, j.q, enum_opts(j)).size();
      em = sp::sp_gallery_multiplicity(sp::standard_sp_close_pair(j.n, j.q));
    }
    eo = bump(j, eo);
    doc["enumerated"] = eo;
    doc["enumerated_components"] = {{"r", er}, {"omega", eo}, {"m", em}};
    doc["match"] = er == fr && eo == fo && em == fm;
    if (ok && er != fr) {
      ok = false;
      counterexample = {
          {"quantity", "r"}, {"formula", fr}, {"enumerated", er}};
    }
    if (ok && eo != fo) {
      ok = false;
      counterexample = {
          {"quantity", "omega"}, {"formula", fo}, {"enumerated", eo}};
    }
    if (ok && em != fm) {
      ok = false;
      counterexample = {
          {"quantity", "m"}, {"formula", fm}, {"enumerated", em}};
    }
  }

  doc["relation_holds"] = holds;
  doc["ok"] = ok;
  if (!ok) doc["counterexample"] = counterexample;
  emit(doc);
  return ok ? 0 : 1;
}

// Builds the close complex of the standard close pair plus its vertex map
// into the matching spherical building.
sph::VertexMap standard_close_map(const Job& j) {
  if (j.family == "sl") {
    if (j.n < 3) throw Infeasible{"sl close complex needs n >= 3"};
    return sl::close_complex(sl::standard_close_pair(j.n, j.q)).to_flags;
  }
  if (j.n < 2) throw Infeasible{"sp close complex needs n >= 2"};
  return sp::sp_close_complex(sp::standard_sp_close_pair(j.n, j.q)).to_flags;
}

int cmd_verify_iso(Job j) {
  require_enumerable(j);
  sph::VertexMap f = standard_close_map(j);
  std::vector<int> witness;
  bool iso = sph::verify_simplicial_iso(f, &witness);
  std::uint64_t dv = bump(j, static_cast<std::uint64_t>(f.domain.vertex_count()));
  std::uint64_t cv = static_cast<std::uint64_t>(f.codomain.vertex_count());
  json doc = header(j);
  doc["domain_vertices"] = dv;
  doc["domain_chambers"] = f.domain.chamber_count();
  doc["codomain_vertices"] = cv;
  doc["codomain_chambers"] = f.codomain.chamber_count();
  doc["iso"] = iso;
  bool ok = iso && dv == cv &&
            f.domain.chamber_count() == f.codomain.chamber_count();
  doc["ok"] = ok;
  if (!ok) {
    if (!iso)
      doc["counterexample"] = {{"quantity", "simplicial iso"},
                               {"witness", witness}};
    else
      doc["counterexample"] = {{"quantity", "vertex count"},
                               {"domain", dv},
                               {"codomain", cv}};
  }
  emit(doc);
  return ok ? 0 : 1;
}

int cmd_export_complex(Job j) {
  require_enumerable(j);
  sph::VertexMap f = standard_close_map(j);
  bool iso = sph::verify_simplicial_iso(f);
  const sph::Complex& C = f.domain;

  if (j.format == "dot") {
    // DOT has no simplex notion: emit the 1-skeleton and keep the facet
    // lists as comments.
    std::set<std::pair<int, int>> edges;
    for (const auto& facet : C.facets)
      for (size_t a = 0; a < facet.size(); ++a)
        for (size_t b = a + 1; b < facet.size(); ++b)
          edges.insert({facet[a], facet[b]});
    std::cout << "// close complex of the standard close pair, family "
              << j.family << ", n " << j.n << ", q " << j.q << "\n";
    std::cout << "// schema_version " << kSchemaVersion << ", vertices "
              << C.vertex_count() << ", facets " << C.chamber_count()
              << ", iso " << (iso ? "true" : "false") << "\n";
    std::cout << "graph close_complex {\n";
    for (int v = 0; v < C.vertex_count(); ++v)
      std::cout << "  v" << v << " [label=\""
                << C.labels[static_cast<size_t>(v)] << "\"];\n";
    for (const auto& [a, b] : edges)
      std::cout << "  v" << a << " -- v" << b << ";\n";
    for (size_t i = 0; i < C.facets.size(); ++i) {
      std::cout << "  // facet " << i << ":";
      for (int v : C.facets[i]) std::cout << " v" << v;
      std::cout << "\n";
    }
    std::cout << "}\n";
    return iso ? 0 : 1;
  }

  json doc = header(j);
  doc["vertices"] = C.labels;
  doc["facets"] = C.facets;
  doc["codomain_vertices"] = f.codomain.labels;
  doc["vertex_map"] = f.map;
  doc["iso"] = iso;
  doc["ok"] = iso;
  if (!iso)
    doc["counterexample"] = {{"quantity", "simplicial iso"}};
  emit(doc);
  return iso ? 0 : 1;
}

struct TableRow {
  std::string family;
  int n;
  unsigned q;
  std::uint64_t r, omega, m, lhs, rhs;
  bool ok;
};

TableRow formula_row(const std::string& fam, int n, unsigned q) {
  TableRow row;
  row.family = fam, row.n = n, row.q = q;
  if (fam == "sl") {
    row.r = gfq::complete_flag_count(n, q);
    row.omega = sl::omega_formula(n, q);
    row.m = gfq::complete_flag_count(n - 2, q);
  } else {
    row.r = sp::r_delta_formula(n, q);
    row.omega = sp::omega_delta_formula(n, q);
    row.m = sp::r_delta_formula(n - 1, q);
  }
  row.lhs = bldg::checked_mul(q, row.r);
  row.rhs = bldg::checked_mul(row.m, row.omega);
  row.ok = row.lhs == row.rhs;
  return row;
}

int cmd_table(Job j) {
  std::vector<std::string> fams;
  if (j.family == "both")
    fams = {"sl", "sp"};
  else
    fams = {j.family};

  std::vector<TableRow> rows;
  for (const auto& fam : fams) {
    int lo = fam == "sl" ? 3 : 2;  // smallest rank with all columns defined
    int hi = fam == "sl" ? (j.q == 2 ? 5 : 4) : (j.q == 2 ? 3 : 2);
    if (j.range_given) {
      lo = std::max(lo, j.n_min);
      hi = j.n_max;
    }
    for (int n = lo; n <= hi; ++n) {
      if (!j.force && !enum_ok(fam, n, j.q))
        throw Infeasible{"table row (" + fam + ", n=" + std::to_string(n) +
                         ", q=" + std::to_string(j.q) +
                         ") is outside the envelope; pass --force for "
                         "formula-only rows"};
      rows.push_back(formula_row(fam, n, j.q));
    }
  }
  if (!rows.empty() && j.inject_fault) {
    rows[0].omega = bump(j, rows[0].omega);
    rows[0].rhs = bldg::checked_mul(rows[0].m, rows[0].omega);
    rows[0].ok = rows[0].lhs == rows[0].rhs;
  }

  bool ok = true;
  json counterexample;
  for (const auto& row : rows)
    if (!row.ok && ok) {
      ok = false;
      counterexample = {{"family", row.family}, {"n", row.n},
                        {"q", row.q},           {"q_times_r", row.lhs},
                        {"m_times_omega", row.rhs}};
    }

  if (j.format == "csv") {
    // RFC 4180: CRLF line endings; no field needs quoting.
    std::cout << "family,n,q,r,omega,m,q_times_r,r_prev_times_omega,"
                 "relation_ok\r\n";
    for (const auto& row : rows)
      std::cout << row.family << "," << row.n << "," << row.q << "," << row.r
                << "," << row.omega << "," << row.m << "," << row.lhs << ","
                << row.rhs << "," << (row.ok ? "true" : "false") << "\r\n";
    if (!ok) std::cerr << "bldgtool: counterexample " << counterexample.dump()
                       << "\n";
    return ok ? 0 : 1;
  }

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = j.command;
  doc["q"] = j.q;
  doc["precision"] = lat::kWorkPrec;
  json jrows = json::array();
  for (const auto& row : rows)
    jrows.push_back({{"family", row.family},
                     {"n", row.n},
                     {"q", row.q},
                     {"r", row.r},
                     {"omega", row.omega},
                     {"m", row.m},
                     {"q_times_r", row.lhs},
                     {"r_prev_times_omega", row.rhs},
                     {"relation_ok", row.ok}});
  doc["rows"] = jrows;
  doc["ok"] = ok;
  if (!ok) doc["counterexample"] = counterexample;
  emit(doc);
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------ driver

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

void resolve_format(Job& j) {
  std::vector<std::string> allowed;
  std::string fallback;
  if (j.command == "table")
    allowed = {"csv", "json"}, fallback = "csv";
  else if (j.command == "export-complex")
    allowed = {"json", "dot"}, fallback = "json";
  else
    allowed = {"json"}, fallback = "json";
  if (j.format.empty()) j.format = fallback;
  if (std::find(allowed.begin(), allowed.end(), j.format) == allowed.end())
    throw Infeasible{"format '" + j.format + "' is not available for " +
                     j.command};
}

int dispatch(Job j) {
  if (j.precision > lat::kWorkPrec)
    throw Infeasible{"this build carries working precision " +
                     std::to_string(lat::kWorkPrec) +
                     "; requested " + std::to_string(j.precision)};
  if (j.precision < 1) throw Infeasible{"precision must be positive"};
  resolve_format(j);
  if (j.command == "count-chambers") return cmd_count_chambers(j);
  if (j.command == "count-close") return cmd_count_close(j);
  if (j.command == "multiplicity") return cmd_multiplicity(j);
  if (j.command == "verify-relation") return cmd_verify_relation(j);
  if (j.command == "verify-iso") return cmd_verify_iso(j);
  if (j.command == "export-complex") return cmd_export_complex(j);
  if (j.command == "table") return cmd_table(j);
  throw Infeasible{"unknown command"};
}

int fail_job(const std::string& why) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["error"] = why;
  emit(doc);
  std::cerr << "bldgtool: " << why << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  auto t0 = std::chrono::steady_clock::now();

  CLI::App app{"exact local structure of lattice buildings: counts, "
               "verifications, exports"};
  app.require_subcommand(1);

  Job job;
  int threads_flag = 0;

  auto add_common = [&](CLI::App* c, bool with_n) {
    c->add_option("--q", job.q, "residue field size (prime power)")
        ->default_val(2);
    if (with_n)
      c->add_option("--n", job.n, "rank parameter")->required();
    c->add_option("--format", job.format, "output format");
    c->add_option("--threads", threads_flag, "worker threads (or THREADS env)");
    c->add_option("--precision", job.precision,
                  "required working precision ceiling")
        ->default_val(lat::kWorkPrec);
    c->add_flag("--slow", job.slow, "unlock the slow enumeration tier");
    c->add_flag("--force", job.force, "attempt sizes outside the envelope");
    c->add_flag("--inject-fault", job.inject_fault)->group("");  // test hook
    c->callback([&job, c] { job.command = c->get_name(); });
    return c;
  };
  auto add_family = [&](CLI::App* c) {
    c->add_option("--family", job.family, "building family: sl or sp")
        ->required()
        ->check(CLI::IsMember({"sl", "sp"}));
    return c;
  };

  add_family(add_common(
      app.add_subcommand("count-chambers",
                         "chambers through the standard vertex vs formula"),
      true));
  add_family(add_common(
      app.add_subcommand("count-close",
                         "close vertices of the standard vertex vs formula"),
      true));

  auto* mult = add_family(add_common(
      app.add_subcommand("multiplicity",
                         "gallery multiplicities between close pairs"),
      true));
  mult->add_option("--pairs", job.pairs, "close pairs to sample")
      ->default_val(20);
  mult->add_option("--seed", job.seed, "sampling seed")->default_val(17);
  mult->add_flag("--all", job.all_pairs,
                 "check every close pair and the multiplicity sum");

  add_family(add_common(
      app.add_subcommand("verify-relation",
                         "q*r = m*omega, formulas plus enumeration"),
      true));
  add_family(add_common(
      app.add_subcommand("verify-iso",
                         "close complex vs spherical building"),
      true));
  add_family(add_common(
      app.add_subcommand("export-complex",
                         "emit the close complex (json or dot)"),
      true));

  auto* table = add_common(
      app.add_subcommand("table", "formula table r, omega, m per (family, n)"),
      false);
  table->add_option("--family", job.family, "sl, sp, or both")
      ->default_val("both")
      ->check(CLI::IsMember({"sl", "sp", "both"}));
  auto* nmin = table->add_option("--n-min", job.n_min, "first rank");
  auto* nmax = table->add_option("--n-max", job.n_max, "last rank");
  nmin->needs(nmax);
  nmax->needs(nmin);

  int rc;
  try {
    app.parse(argc, argv);
    job.range_given = nmax->count() > 0;
    job.threads = resolve_threads(threads_flag);
    if (job.threads < 1 || job.threads > 64)
      throw Infeasible{"threads must lie in 1..64"};
    rc = dispatch(job);
  } catch (const CLI::ParseError& e) {
    int pe = app.exit(e);
    rc = pe == 0 ? 0 : 2;
  } catch (const Infeasible& e) {
    rc = fail_job(e.why);
  } catch (const bldg::Error& e) {
    rc = fail_job(e.what());
  }

  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  std::cerr << "bldgtool: wall " << ms << " ms\n";
  return rc;
}
