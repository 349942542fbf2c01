#ifndef HANKEL_DETAIL_JSON_IO_HPP
#define HANKEL_DETAIL_JSON_IO_HPP

#include "hankel/asymptotics.hpp"
#include "hankel/model.hpp"
#include "hankel/operators.hpp"
#include "hankel/sequences.hpp"
#include "hankel/spectra.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>

namespace hankel::detail {

using json = nlohmann::json;

/// Validation error unless every key of obj is in allowed.
void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where);
const json& require(const json& obj, const char* key, const std::string& where);
void require_object(const json& value, const std::string& where);

double get_number(const json& value, const std::string& where);
std::int64_t get_integer(const json& value, const std::string& where);
std::uint64_t get_unsigned(const json& value, const std::string& where);
std::string get_string(const json& value, const std::string& where);
bool get_bool(const json& value, const std::string& where);

/// [re, im]; a plain number is read as a real value.
complex complex_from_json(const json& value, const std::string& where);
json to_json(complex z);
/// NaN and infinities become null.
json number(double x);

DiscreteModel discrete_model_from_json(const json& value, const std::string& where);
ContinuousModel continuous_model_from_json(const json& value, const std::string& where);
Cutoffs cutoffs_from_json(const json& value, const std::string& where);
MeshSpec mesh_from_json(const json& value, MeshSpec defaults, const std::string& where);

json to_json(const DiscreteModel& model);
json to_json(const ContinuousModel& model);
json to_json(const MeshSpec& mesh);
json to_json(const PredictedLaw& law);
json to_json(const SeriesMeta& meta);
json to_json(const IndexRange& range);
json to_json(const AsymptoticFit& fit);
json to_json(const DecayCertificate& certificate);
json to_json(const LocalizationReport& report);

} // namespace hankel::detail

#endif
