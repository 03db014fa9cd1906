#include "twosel/io.hpp"

#include <openssl/evp.h>

#include <iomanip>
#include <sstream>

namespace twosel::io {

json to_json(const Int& n) {
  if (n.fits_slong_p()) return n.get_si();
  return n.get_str();
}

json to_json(const Rat& q0) {
  Rat q = q0;
  q.canonicalize();
  if (q.get_den() == 1) return to_json(Int(q.get_num()));
  return q.get_str();
}

json to_json(const BinaryForm& f) { return format_form(f); }

json to_json(const MatZ& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const MatQ& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const DensityReport& r) {
  json j;
  j["kind"] = r.kind;
  j["p"] = r.p;
  j["a"] = r.a;
  j["b"] = r.b;
  j["method"] = r.mode;
  if (r.mode == "sample") {
    j["seed"] = r.seed;
    j["samples"] = r.samples;
    j["hits"] = to_json(r.count);
    j["estimate"] = r.estimate;
    j["std_error"] = r.std_error;
    j["interval"] = {r.interval.lo, r.interval.hi};
  } else {
    j["count"] = to_json(r.count);
    j["total"] = to_json(r.total);
    j["density"] = to_json(r.density);
  }
  if (r.kind == "special") j["envelope"] = r.envelope;
  else j["formula"] = to_json(r.formula);
  j["verdict"] = r.verdict;
  return j;
}

namespace {

json cyclotomic_json(const Cyclotomic& c) {
  json coeffs = json::array();
  for (const Int& x : c.coeffs()) coeffs.push_back(to_json(x));
  return coeffs;
}

}  // namespace

json to_json(const FourierValue& v, const CharacterVector& chi) {
  json j;
  j["p"] = chi.p;
  j["character"] = chi.entries;
  j["rank"] = chi.rank();
  j["method"] = "exact-cyclotomic";
  j["direct"] = cyclotomic_json(v.direct);
  j["product"] = cyclotomic_json(v.product);
  j["diagonal"] = v.diagonal;
  j["agree"] = v.agree;
  j["magnitude"] = v.magnitude;
  j["bound"] = 4 * std::pow(static_cast<double>(chi.p), 4 - chi.rank() / 2.0);
  return j;
}

json to_json(const RegionReport& r) {
  json j;
  j["case"] = r.case_id;
  j["method"] = r.method;
  if (r.method == "sample") {
    j["count"] = r.count;
    j["std_error"] = r.std_error;
  } else {
    j["count"] = to_json(r.exact_count);
  }
  j["candidates"] = r.candidates;
  j["bound"] = r.bound;
  j["ratio"] = r.ratio;
  j["condition_holds"] = r.condition_holds;
  j["unipotent"] = r.unipotent;
  return j;
}

json to_json(const SolubilityCertificate& c) {
  json j;
  j["place"] = c.place();
  j["soluble"] = c.soluble;
  j["kind"] = c.kind;
  if (c.soluble && c.kind != "real-root") j["point"] = {to_json(c.x), to_json(c.y)};
  if (c.p != 0) {
    j["precision"] = c.precision;
    j["depth"] = c.depth;
    j["depth_bound"] = c.depth_bound;
  }
  return j;
}

json to_json(const EnumerationReport& r) {
  json j;
  j["I"] = to_json(r.I);
  j["J"] = to_json(r.J);
  j["method"] = "box-enumeration";
  j["orbit_constant"] = static_cast<double>(r.orbit_constant);
  j["bounds"] = {{"a", r.bound_a}, {"b", r.bound_b}, {"c", r.bound_c}};
  j["candidates"] = r.candidates;
  j["forms_found"] = r.forms_found;
  j["z_classes_all"] = r.z_classes_all;
  j["undecided"] = r.undecided;
  json classes = json::array();
  for (const QuarticClass& q : r.classes) {
    json c;
    c["form"] = to_json(q.representative);
    c["trace"] = q.trace;
    json certs = json::array();
    for (const SolubilityCertificate& s : q.certificates) certs.push_back(to_json(s));
    c["certificates"] = certs;
    classes.push_back(c);
  }
  j["classes"] = classes;
  return j;
}

json to_json(const SelmerReport& r) {
  json j;
  j["I"] = to_json(r.curve.I);
  j["J"] = to_json(r.curve.J);
  j["height"] = to_json(r.height);
  j["z_classes"] = r.z_classes;
  j["q_classes"] = r.q_classes;
  j["q_method"] = r.q_method;
  j["sel2"] = to_json(r.sel2);
  j["torsion2"] = r.torsion2;
  j["oracle"] = r.oracle ? to_json(*r.oracle) : json(nullptr);
  j["flags"] = r.flags;
  j["enumeration"] = to_json(r.enumeration);
  return j;
}

json to_json(const OracleReport& r) {
  json j;
  j["method"] = "oracle";
  j["size"] = to_json(r.size);
  json primes = json::array();
  for (const Int& p : r.primes) primes.push_back(to_json(p));
  j["primes"] = primes;
  json elements = json::array();
  for (const auto& [d1, d2] : r.elements) elements.push_back({to_json(d1), to_json(d2)});
  j["elements"] = elements;
  j["subgroup"] = r.subgroup;
  return j;
}

json to_json(const WitnessResult& w) {
  json j;
  j["ok"] = w.ok;
  json records = json::array();
  for (const WitnessRecord& r : w.witness.records) records.push_back({{"p", to_json(r.p)}, {"e1", r.e1}, {"e2", r.e2}});
  j["records"] = records;
  j["a1"] = to_json(w.witness.a1);
  j["a2"] = to_json(w.witness.a2);
  j["a3"] = to_json(w.witness.a3);
  j["diagnostics"] = w.diagnostics;
  return j;
}

json to_json(const SpecializeResult& s) {
  json j;
  j["ok"] = s.ok;
  j["already_special"] = s.already_special;
  j["c"] = s.c;
  j["failed_step"] = s.failed_step;
  if (s.ok) {
    j["A"] = to_json(s.pair.A);
    j["B"] = to_json(s.pair.B);
  }
  return j;
}

json moments_summary(const MomentsReport& r) {
  json j;
  j["height_bound"] = to_json(r.height_bound);
  j["method"] = "box-enumeration";
  j["count"] = to_json(r.count);
  j["sum_sel"] = to_json(r.sum_sel);
  j["sum_sel_sq"] = to_json(r.sum_sel_sq);
  j["sum_sel_sel_minus_1"] = to_json(Int(r.sum_sel_sq - r.sum_sel));
  j["first_moment"] = r.first_moment();
  j["second_moment"] = r.second_moment();
  j["monotone"] = r.monotone();
  j["excluded"] = r.excluded;
  j["caveat"] = "desk-scale averages; the asymptotic limits are not targets";
  return j;
}

std::string moments_csv(const MomentsReport& r) {
  std::ostringstream out;
  out << "I,J,height,z_classes,q_classes,sel2,oracle,flags,cum_sel,cum_sel_sq\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const CurveRow& row = r.rows[i];
    out << row.I << ',' << row.J << ',' << row.height << ',' << row.z_classes << ',' << row.q_classes << ',' << row.sel2
        << ',' << (row.oracle ? row.oracle->get_str() : "") << ',' << row.flags << ',' << r.cumulative_sel[i] << ','
        << r.cumulative_sel_sq[i] << '\n';
  }
  return out.str();
}

std::string density_csv(const std::vector<DensityReport>& rows) {
  std::ostringstream out;
  out << "p,a,b,mode,count,total,density_num,density_den,formula_num,formula_den,verdict,seed\n";
  for (const DensityReport& r : rows) {
    out << r.p << ',' << r.a << ',' << r.b << ',' << r.mode << ',' << r.count << ',' << r.total << ',';
    if (r.mode == "exhaustive") out << r.density.get_num() << ',' << r.density.get_den() << ',';
    else out << ",,";
    if (r.kind == "rank-strata") out << r.formula.get_num() << ',' << r.formula.get_den() << ',';
    else out << ",,";
    out << r.verdict << ',';
    if (r.mode == "sample") out << r.seed;
    out << '\n';
  }
  return out.str();
}

namespace {

Rat rat_from_json(const json& v) {
  if (v.is_number_integer()) return Rat(Int(std::to_string(v.get<long long>())));
  if (v.is_string()) {
    Rat q;
    if (q.set_str(v.get<std::string>(), 10) != 0) throw Error("bad number '" + v.get<std::string>() + "'");
    q.canonicalize();
    return q;
  }
  throw Error("expected an integer or a \"p/q\" string");
}

}  // namespace

MatZ parse_matrix(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("bad matrix: ") + e.what());
  }
  if (!j.is_array() || j.empty()) throw Error("matrix must be a nonempty list of rows");
  const std::size_t n = j.size();
  MatZ m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) throw Error("matrix must be square");
    for (std::size_t k = 0; k < n; ++k) {
      const Rat q = rat_from_json(j[i][k]);
      if (q.get_den() != 1) throw Error("matrix entries must be integers");
      m(i, k) = q.get_num();
    }
  }
  return m;
}

std::vector<Rat> parse_rationals(const std::string& text) {
  std::string s = text;
  // bare fractions such as 3/2 are quoted before parsing
  std::string quoted;
  for (std::size_t i = 0; i < s.size();) {
    if (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '-') {
      std::size_t k = i;
      while (k < s.size() && (std::isdigit(static_cast<unsigned char>(s[k])) || s[k] == '-' || s[k] == '/')) ++k;
      quoted += '"' + s.substr(i, k - i) + '"';
      i = k;
    } else {
      quoted += s[i++];
    }
  }
  json j;
  try {
    j = json::parse(quoted);
  } catch (const json::exception& e) {
    throw Error(std::string("bad list: ") + e.what());
  }
  if (!j.is_array()) throw Error("expected a list");
  std::vector<Rat> out;
  for (const json& v : j) out.push_back(rat_from_json(v));
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return out.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace twosel::io
