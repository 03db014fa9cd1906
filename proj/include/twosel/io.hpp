#pragma once

#include "twosel/localstats.hpp"
#include "twosel/pairs.hpp"
#include "twosel/selmer.hpp"
#include "twosel/specialness.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace twosel::io {

using json = nlohmann::ordered_json;

// Integers that fit in 64 bits become JSON numbers, larger ones decimal strings.
json to_json(const Int& n);
// Integral values as numbers, others as "p/q".
json to_json(const Rat& q);
json to_json(const BinaryForm& f);
json to_json(const MatZ& m);
json to_json(const MatQ& m);
json to_json(const DensityReport& r);
json to_json(const FourierValue& v, const CharacterVector& chi);
json to_json(const RegionReport& r);
json to_json(const SolubilityCertificate& c);
json to_json(const EnumerationReport& r);
json to_json(const SelmerReport& r);
json to_json(const OracleReport& r);
json to_json(const WitnessResult& w);
json to_json(const SpecializeResult& s);
// Totals only; rows go to the CSV.
json moments_summary(const MomentsReport& r);

// Columns: I,J,height,z_classes,q_classes,sel2,oracle,flags,cum_sel,cum_sel_sq
std::string moments_csv(const MomentsReport& r);
// Columns: p,a,b,mode,count,total,density_num,density_den,formula_num,formula_den,verdict,seed
// Density and formula are left empty where they do not apply (samples, special sets).
std::string density_csv(const std::vector<DensityReport>& rows);

MatZ parse_matrix(const std::string& text);  // "[[1,2],[3,4]]"
std::vector<Rat> parse_rationals(const std::string& text);  // "[1, 3/2]"

std::string sha256_hex(const std::string& bytes);
// Pretty-printed with a trailing newline.
std::string dump(const json& j);

}  // namespace twosel::io
