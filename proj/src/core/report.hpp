#pragma once

// JSON serialization of pointwise and flow reports. Tensors are nested arrays
// in row-major index order; numbers are written with round-trip precision.

#include <string>
#include <vector>

#include "json.hpp"
#include "splitting.hpp"

namespace cn2 {

using Json = nlohmann::ordered_json;

Json to_json(const Vec& v);
Json to_json(const Mat& m);  // list of rows
Json columns_json(const Mat& m);  // list of columns

Json curvature_json(const CurvatureReport& r, const CurvatureOptions& opt);

/// C(t) for each t, with class, trace/det evolution and singular times.
Json riccati_json(const Mat2& C0, const std::vector<double>& ts, double class_tol = 1e-9);

Json splitting_json(const AdaptedFrame& f, const SplittingTensor& st);
Json riccati_field_json(const RiccatiFieldReport& r);
Json divergence_json(const DivergenceReport& r);
Json jacobi_json(const JacobiReport& r);
Json transport_json(const TransportResult& r, const Mat& initial);

std::string dump(const Json& j);

}  // namespace cn2
