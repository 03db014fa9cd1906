#include "twosel/algebras.hpp"
#include "twosel/io.hpp"
#include "twosel/localstats.hpp"
#include "twosel/pairs.hpp"
#include "twosel/selmer.hpp"
#include "twosel/specialness.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace twosel;
using io::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Output {
  std::string file;
  std::string bytes;
};

struct Result {
  std::vector<Output> outputs;
  bool verdict_ok = true;
  json summary;  // echoed to stdout
};

Int parse_int(const std::string& s) {
  Int v;
  if (s.empty() || v.set_str(s, 10) != 0) throw Error("bad integer '" + s + "'");
  return v;
}

Rat parse_rat(const std::string& s) {
  Rat v;
  if (s.empty() || v.set_str(s, 10) != 0) throw Error("bad rational '" + s + "'");
  if (v.get_den() == 0) throw Error("zero denominator");
  v.canonicalize();
  return v;
}

std::string now_iso() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CLI::ConversionError("config line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

json effective_options(const CLI::App* sub) {
  json j;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      j[name] = r.size() == 1 ? json(r[0]) : json(r);
    } else if (opt->get_expected_min() == 0) {
      j[name] = false;
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

json versions() {
  return {{"twosel", kVersion},
          {"gmp", gmp_version},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION}};
}

// --- options shared by the subcommands ----------------------------------------

struct Common {
  std::string out = ".";
  std::string name;
  std::string config;
};

struct Opts {
  std::string form, A, B, a = "1", b = "1", p = "3", I, J, e1, e2, e3, Z = "8", s = "[1,1,1]", height = "1000",
                       mod_I = "1", res_I = "0", mod_J = "1", res_J = "0", chi, diag, kind = "rank-strata", mode = "auto",
                       case_id = "1";
  int k = 1, da = 1, db = 1, shards = 1, depth_cap = 6;
  std::uint64_t seed = 1, samples = 1000000, limit = 100000000ULL, exact_limit = 2000000, max_candidates = 1000000000ULL;
  double margin = 1.0;
  bool no_oracle = false, sweep = false;
  std::string desk_limit = "1000000";
};

CountMode parse_mode(const std::string& m) {
  if (m == "auto") return CountMode::Auto;
  if (m == "exhaustive") return CountMode::Exhaustive;
  if (m == "sample") return CountMode::Sample;
  throw CLI::ValidationError("--mode", "expected auto, exhaustive or sample");
}

Output json_output(const std::string& name, const json& j) { return {name + ".json", io::dump(j)}; }

// --- subcommands -----------------------------------------------------------------

Result cmd_invariants(const Opts& o, const std::string& name) {
  const BinaryForm f = parse_form(o.form);
  const InvariantData inv = invariants(f);
  json j;
  j["form"] = io::to_json(f);
  j["I"] = io::to_json(inv.I);
  j["J"] = io::to_json(inv.J);
  j["Delta"] = io::to_json(inv.Delta);
  j["height"] = io::to_json(inv.height);
  j["method"] = "exact";
  Result r;
  if (f.degree() == 4) {
    const Int disc = discriminant(f);
    j["Delta_resultant"] = io::to_json(disc);
    r.verdict_ok = Rat(disc) == inv.Delta;
  }
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_monicize(const Opts& o, const std::string& name) {
  const BinaryForm f = parse_form(o.form);
  const BinaryForm g = monicize(f);
  const auto back = demonicize(g, f[0]);
  json j;
  j["form"] = io::to_json(f);
  j["monic"] = io::to_json(g);
  j["round_trip"] = back.has_value() && *back == f;
  Result r;
  r.verdict_ok = j["round_trip"].get<bool>();
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_construct_pair(const Opts& o, const std::string& name) {
  const BinaryForm f = parse_form(o.form);
  const DescentDatum d = canonical_datum(f);
  const DatumCheck check = check_datum(d);
  json j;
  j["form"] = io::to_json(f);
  j["datum_containment"] = check.containment;
  j["datum_norm_condition"] = check.norm_condition;
  Result r;
  if (!check.ok()) {
    r.verdict_ok = false;
  } else {
    const QuadPair q = construct_pair(d);
    const BinaryForm res = resolvent(q);
    j["A"] = io::to_json(q.A);
    j["B"] = io::to_json(q.B);
    j["resolvent"] = io::to_json(res);
    j["resolvent_is_monicization"] = res == monicize(f);
    j["condition_b"] = condition_b(f, q);
    j["distinguished_mod_5"] = is_distinguished_modp(q, 5);
    r.verdict_ok = res == monicize(f) && j["condition_b"].get<bool>();
  }
  j["method"] = "exact";
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_arises_for(const Opts& o, const std::string& name) {
  const BinaryForm f = parse_form(o.form);
  const QuadPair q{io::parse_matrix(o.A), io::parse_matrix(o.B)};
  json j;
  j["form"] = io::to_json(f);
  j["resolvent"] = io::to_json(resolvent(q));
  j["arises_for"] = arises_for(f, q);
  j["method"] = "exact";
  Result r;
  r.verdict_ok = j["arises_for"].get<bool>();
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_special_check(const Opts& o, const std::string& name) {
  const MatZ B = io::parse_matrix(o.B);
  const Int a = parse_int(o.a);
  json j;
  j["a"] = io::to_json(a);
  j["special"] = is_special_at(B, a);
  j["rank_le1"] = rank_le1_mod(B, a);
  j["method"] = "exact";
  Result r;
  r.verdict_ok = j["special"].get<bool>();
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_witness(const Opts& o, const std::string& name) {
  const MatZ B = io::parse_matrix(o.B);
  const Int a = parse_int(o.a);
  const WitnessResult w = special_witness(B, a);
  json j = io::to_json(w);
  j["a"] = io::to_json(a);
  j["method"] = "exact";
  Result r;
  r.verdict_ok = w.ok;
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_specialize(const Opts& o, const std::string& name) {
  const BinaryForm f = parse_form(o.form);
  QuadPair q;
  if (!o.A.empty() || !o.B.empty()) q = {io::parse_matrix(o.A), io::parse_matrix(o.B)};
  else q = construct_pair(canonical_datum(f));
  const SpecializeResult s = specialize(f, q, parse_int(o.p));
  json j = io::to_json(s);
  j["form"] = io::to_json(f);
  j["p"] = io::to_json(parse_int(o.p));
  j["method"] = "exact";
  Result r;
  r.verdict_ok = s.ok;
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_density(const Opts& o, const std::string& name) {
  const i64 p = parse_int(o.p).get_si();
  const CountMode mode = parse_mode(o.mode);
  const SampleSpec spec{o.seed, o.samples};
  std::vector<DensityReport> parts;
  for (int i = 0; i < o.shards; ++i) {
    const Shard shard{i, o.shards};
    if (o.kind == "rank-strata") parts.push_back(count_rank_strata(p, o.da, o.db, mode, spec, shard, o.limit));
    else if (o.kind == "special") parts.push_back(special_density_estimate(p, o.k, mode, spec, shard, o.limit));
    else throw CLI::ValidationError("--kind", "expected rank-strata or special");
  }
  const DensityReport rep = merge_reports(parts);
  json j = io::to_json(rep);
  j["shards"] = o.shards;
  Result r;
  r.verdict_ok = rep.verdict != "mismatch" && rep.verdict != "inconsistent" && rep.verdict != "outside-band" &&
                 rep.verdict != "outside-3-sigma";
  r.summary = j;
  r.outputs.push_back({name + ".csv", io::density_csv({rep})});
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_fourier(const Opts& o, const std::string& name) {
  const i64 p = parse_int(o.p).get_si();
  CharacterVector chi;
  if (!o.chi.empty()) {
    const std::vector<Rat> v = io::parse_rationals(o.chi);
    if (v.size() != 10) throw CLI::ValidationError("--chi", "expected 10 entries");
    chi.p = p;
    for (int i = 0; i < 10; ++i) chi.entries[i] = Int(v[i]).get_si();
  } else {
    const std::vector<Rat> v = io::parse_rationals(o.diag.empty() ? "[1,1,1,1]" : o.diag);
    if (v.size() != 4) throw CLI::ValidationError("--diag", "expected 4 entries");
    chi = CharacterVector::diagonal(p, {Int(v[0]).get_si(), Int(v[1]).get_si(), Int(v[2]).get_si(), Int(v[3]).get_si()});
  }
  Result r;
  json j;
  try {
    const FourierValue v = fourier_rank1(p, chi);
    j = io::to_json(v, chi);
    r.verdict_ok = v.agree && v.magnitude <= j["bound"].get<double>() + 1e-9;
  } catch (const Error& e) {
    j["p"] = p;
    j["error"] = e.what();
    r.verdict_ok = false;
  }
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_region_count(const Opts& o, const std::string& name) {
  SiegelPoint s{io::parse_rationals(o.s)};
  RegionOptions ro;
  ro.exact_limit = o.exact_limit;
  ro.samples = o.samples;
  ro.seed = o.seed;
  const RegionReport rep = region_count(o.case_id, s, parse_rat(o.Z), parse_int(o.a), parse_int(o.b), ro);
  json j = io::to_json(rep);
  Result r;
  r.verdict_ok = rep.condition_holds || rep.count == 0;
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

EnumerationOptions enumeration_options(const Opts& o) {
  EnumerationOptions e;
  e.margin = o.margin;
  e.max_candidates = o.max_candidates;
  e.depth_cap = o.depth_cap;
  return e;
}

Result cmd_enumerate(const Opts& o, const std::string& name) {
  const EllipticCurve e = normalize_curve(parse_int(o.I), parse_int(o.J));
  const EnumerationOptions eo = enumeration_options(o);
  const EnumerationReport rep = enumerate_classes(e, eo);
  json j = io::to_json(rep);
  j["curve"] = {{"I", io::to_json(e.I)}, {"J", io::to_json(e.J)}};
  j["margin"] = o.margin;
  Result r;
  if (o.sweep) {
    EnumerationOptions wide = eo;
    wide.margin *= 2;
    const EnumerationReport w = enumerate_classes(e, wide);
    bool stable = w.classes.size() == rep.classes.size();
    for (std::size_t i = 0; stable && i < w.classes.size(); ++i)
      stable = w.classes[i].representative == rep.classes[i].representative;
    j["sweep_stable"] = stable;
    r.verdict_ok = stable;
  }
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_selmer(const Opts& o, const std::string& name) {
  SelmerOptions so;
  so.enumeration = enumeration_options(o);
  so.run_oracle = !o.no_oracle;
  const SelmerReport rep = selmer(parse_int(o.I), parse_int(o.J), so);
  json j = io::to_json(rep);
  j["margin"] = o.margin;
  Result r;
  r.verdict_ok = rep.flags.empty();
  if (o.sweep) {
    SelmerOptions wide = so;
    wide.enumeration.margin *= 2;
    const bool stable = selmer(parse_int(o.I), parse_int(o.J), wide).sel2 == rep.sel2;
    j["sweep_stable"] = stable;
    r.verdict_ok = r.verdict_ok && stable;
  }
  json brief = j;
  brief.erase("enumeration");
  r.summary = brief;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_oracle(const Opts& o, const std::string& name) {
  const Int e1 = parse_int(o.e1), e2 = parse_int(o.e2), e3 = parse_int(o.e3);
  const OracleReport rep = two_torsion_oracle(e1, e2, e3);
  json j = io::to_json(rep);
  const auto [I, J] = two_torsion_invariants(e1, e2, e3);
  j["roots"] = {io::to_json(e1), io::to_json(e2), io::to_json(e3)};
  j["I"] = io::to_json(I);
  j["J"] = io::to_json(J);
  Result r;
  r.verdict_ok = rep.subgroup;
  r.summary = j;
  r.outputs.push_back(json_output(name, j));
  return r;
}

Result cmd_moments(const Opts& o, const std::string& name) {
  const Rat bound = parse_rat(o.height);
  if (bound > parse_rat(o.desk_limit)) throw CLI::ValidationError("--height", "exceeds the configured desk limit");
  MomentsFilter filter{parse_int(o.mod_I), parse_int(o.res_I), parse_int(o.mod_J), parse_int(o.res_J)};
  SelmerOptions so;
  so.enumeration = enumeration_options(o);
  so.run_oracle = !o.no_oracle;
  const std::vector<EllipticCurve> curves = normalized_curves(bound, filter);
  std::vector<MomentsReport> parts;
  for (int i = 0; i < o.shards; ++i) parts.push_back(moments_over(curves, so, i, o.shards));
  MomentsReport rep = merge_moments(parts);
  rep.height_bound = bound;
  json j = io::moments_summary(rep);
  j["shards"] = o.shards;
  j["curves_listed"] = curves.size();
  bool invariant_ok = true;
  for (const CurveRow& row : rep.rows)
    if (!is_power_of_two(row.sel2) || row.sel2 < row.torsion2) invariant_ok = false;
  j["power_of_two_and_torsion_bound"] = invariant_ok;
  Result r;
  r.verdict_ok = invariant_ok && rep.monotone();
  r.summary = j;
  r.outputs.push_back({name + ".csv", io::moments_csv(rep)});
  r.outputs.push_back(json_output(name, j));
  return r;
}

int run(std::vector<std::string> args);

int replay(const std::string& manifest_path, const std::vector<std::string>& extra) {
  std::ifstream in(manifest_path);
  if (!in) {
    std::cerr << "cannot read manifest " << manifest_path << "\n";
    return 2;
  }
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    std::cerr << "bad manifest: " << e.what() << "\n";
    return 2;
  }
  if (m.value("schema", "") != "1") {
    std::cerr << "unsupported manifest schema\n";
    return 2;
  }
  std::vector<std::string> args = m["argv"].get<std::vector<std::string>>();
  args.insert(args.end(), extra.begin(), extra.end());
  const int code = run(args);
  if (code == 2) return code;
  // compare digests of the regenerated outputs
  const fs::path dir = m["out"].get<std::string>();
  std::string out_dir = dir.string();
  for (std::size_t i = 0; i + 1 < extra.size(); ++i)
    if (extra[i] == "--out") out_dir = extra[i + 1];
  bool same = true;
  for (const json& o : m["outputs"]) {
    std::ifstream f(fs::path(out_dir) / o["file"].get<std::string>(), std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const bool match = io::sha256_hex(bytes) == o["sha256"].get<std::string>();
    std::cout << o["file"].get<std::string>() << ": " << (match ? "identical" : "DIFFERENT") << "\n";
    same = same && match;
  }
  return same ? code : 1;
}

int run(std::vector<std::string> args) {
  CLI::App app{"Binary quartic forms, quadric pairs and 2-Selmer statistics", "twosel"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kVersion);

  Common common;
  Opts o;
  std::map<std::string, std::function<Result(const Opts&, const std::string&)>> handlers;

  auto add = [&](const std::string& name, const std::string& desc, auto handler) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--name", common.name, "output file stem (default: the subcommand)");
    sub->add_option("--config", common.config, "key=value file; flags override it");
    handlers[name] = handler;
    return sub;
  };

  auto form_arg = [&](CLI::App* sub) { sub->add_option("form,--form", o.form, "binary form [f0,...,fn]")->required(); };
  auto enum_args = [&](CLI::App* sub) {
    sub->add_option("--margin", o.margin, "multiplier on the rigorous coefficient box");
    sub->add_option("--max-candidates", o.max_candidates, "refuse larger boxes");
    sub->add_option("--depth-cap", o.depth_cap, "BFS depth cap for GL2(Z) canonical forms");
  };

  form_arg(add("invariants", "I, J, Delta and height of a form", cmd_invariants));
  form_arg(add("monicize", "monic form f0^{-1} f(x, f0 y)", cmd_monicize));
  form_arg(add("construct-pair", "pair of symmetric matrices from the canonical datum of f", cmd_construct_pair));
  {
    CLI::App* s = add("arises-for", "does the pair (A, B) arise for f", cmd_arises_for);
    form_arg(s);
    s->add_option("--A", o.A, "matrix [[..],..]")->required();
    s->add_option("--B", o.B, "matrix [[..],..]")->required();
  }
  {
    CLI::App* s = add("special-check", "is B special at a", cmd_special_check);
    s->add_option("--B", o.B, "symmetric matrix")->required();
    s->add_option("--a", o.a, "modulus a");
  }
  {
    CLI::App* s = add("witness", "witness for specialness of B at a", cmd_witness);
    s->add_option("--B", o.B, "symmetric matrix")->required();
    s->add_option("--a", o.a, "modulus a");
  }
  {
    CLI::App* s = add("specialize", "move a pair for f to one special at p", cmd_specialize);
    form_arg(s);
    s->add_option("--p", o.p, "prime");
    s->add_option("--A", o.A, "matrix (default: pair from the canonical datum)");
    s->add_option("--B", o.B, "matrix (default: pair from the canonical datum)");
  }
  {
    CLI::App* s = add("density", "rank-strata or special-set densities", cmd_density);
    s->add_option("--kind", o.kind, "rank-strata or special");
    s->add_option("--p", o.p, "prime");
    s->add_option("--a", o.da, "rank <= 1 modulo p^a");
    s->add_option("--b", o.db, "rank <= 2 modulo p^b");
    s->add_option("--k", o.k, "special at p^k");
    s->add_option("--mode", o.mode, "auto, exhaustive or sample");
    s->add_option("--seed", o.seed, "sampling seed");
    s->add_option("--samples", o.samples, "number of samples");
    s->add_option("--limit", o.limit, "largest exhaustive enumeration");
    s->add_option("--shards", o.shards, "split the enumeration into K shards")->check(CLI::PositiveNumber);
  }
  {
    CLI::App* s = add("fourier", "Fourier transform of the rank <= 1 set at a character", cmd_fourier);
    s->add_option("--p", o.p, "odd prime");
    s->add_option("--diag", o.diag, "diagonal character [d1,d2,d3,d4]");
    s->add_option("--chi", o.chi, "character by its 10 upper-triangular entries");
  }
  {
    CLI::App* s = add("region-count", "lattice points of a stratum in a Siegel box", cmd_region_count);
    s->add_option("--case", o.case_id, "row 1-6 or a-c");
    s->add_option("--s", o.s, "Siegel point [s1,s2,s3] or [s1,s2]");
    s->add_option("--Z", o.Z, "box scale");
    s->add_option("--a", o.a, "a");
    s->add_option("--b", o.b, "b");
    s->add_option("--exact-limit", o.exact_limit, "largest exhaustive count");
    s->add_option("--samples", o.samples, "samples when not exhaustive");
    s->add_option("--seed", o.seed, "sampling seed");
  }
  {
    CLI::App* s = add("enumerate", "GL2(Z)-classes of locally soluble quartics for a curve", cmd_enumerate);
    s->add_option("--I", o.I, "I")->required();
    s->add_option("--J", o.J, "J")->required();
    enum_args(s);
    s->add_flag("--sweep", o.sweep, "also run with twice the margin and require the same classes");
  }
  {
    CLI::App* s = add("selmer", "|Sel_2| of y^2 = x^3 - (I/3) x - J/27", cmd_selmer);
    s->add_option("--I", o.I, "I")->required();
    s->add_option("--J", o.J, "J")->required();
    enum_args(s);
    s->add_flag("--no-oracle", o.no_oracle, "skip the two-torsion oracle");
    s->add_flag("--sweep", o.sweep, "also run with twice the margin and require the same count");
  }
  {
    CLI::App* s = add("oracle", "|Sel_2| of y^2 = (x - e1)(x - e2)(x - e3) by full 2-descent", cmd_oracle);
    s->add_option("--e1", o.e1, "root")->required();
    s->add_option("--e2", o.e2, "root")->required();
    s->add_option("--e3", o.e3, "root")->required();
  }
  {
    CLI::App* s = add("moments", "Selmer moments over normalised curves of bounded height", cmd_moments);
    s->add_option("--height", o.height, "height bound H(E) < bound");
    s->add_option("--desk-limit", o.desk_limit, "largest accepted height bound");
    s->add_option("--mod-I", o.mod_I, "filter I == res-I mod mod-I");
    s->add_option("--res-I", o.res_I, "");
    s->add_option("--mod-J", o.mod_J, "filter J == res-J mod mod-J");
    s->add_option("--res-J", o.res_J, "");
    s->add_option("--shards", o.shards, "split the curve list into K shards")->check(CLI::PositiveNumber);
    enum_args(s);
    s->add_flag("--no-oracle", o.no_oracle, "skip the two-torsion oracle");
  }

  if (!args.empty() && args[0].rfind("-", 0) != 0 && !handlers.count(args[0])) {
    std::cerr << "unknown subcommand '" << args[0] << "'\n" << app.help();
    return 2;
  }

  // config values go right after the subcommand name, so later command-line flags win
  std::vector<std::string> full = args;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    else continue;
    try {
      std::vector<std::string> injected;
      for (const auto& [key, value] : read_config(path)) injected.push_back("--" + key + "=" + value);
      full.insert(full.begin() + 1, injected.begin(), injected.end());
    } catch (const CLI::Error& e) {
      app.exit(e);
      return 2;
    }
    break;
  }

  std::vector<std::string> reversed(full.rbegin(), full.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  const std::string stem = common.name.empty() ? cmd : common.name;
  const std::string started = now_iso();
  Result result;
  try {
    result = handlers.at(cmd)(o, stem);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::error_code ec;
  fs::create_directories(common.out, ec);
  json outputs = json::array();
  for (const Output& out : result.outputs) {
    const fs::path path = fs::path(common.out) / out.file;
    std::ofstream f(path, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write " << path << "\n";
      return 2;
    }
    f << out.bytes;
    outputs.push_back({{"file", out.file}, {"sha256", io::sha256_hex(out.bytes)}});
  }
  const int code = result.verdict_ok ? 0 : 1;

  json manifest;
  manifest["schema"] = "1";
  manifest["command"] = cmd;
  json argv = json::array();
  for (std::size_t i = 0; i < args.size(); ++i) {
    // the output directory is recorded separately so that a replay can redirect it
    if (args[i] == "--out" && i + 1 < args.size()) {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    argv.push_back(args[i]);
  }
  manifest["argv"] = argv;
  manifest["out"] = common.out;
  manifest["config_file"] = common.config;
  manifest["options"] = effective_options(sub);
  manifest["started_at"] = started;
  manifest["finished_at"] = now_iso();
  manifest["versions"] = versions();
  manifest["outputs"] = outputs;
  manifest["exit_code"] = code;
  const std::string manifest_bytes = io::dump(manifest);
  std::ofstream(fs::path(common.out) / (stem + ".manifest.json"), std::ios::binary) << manifest_bytes;

  std::cout << result.summary.dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!args.empty() && args[0] == "--replay") {
    if (args.size() < 2) {
      std::cerr << "usage: twosel --replay MANIFEST [--out DIR]\n";
      return 2;
    }
    return replay(args[1], std::vector<std::string>(args.begin() + 2, args.end()));
  }
  return run(args);
}
