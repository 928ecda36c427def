// Copyright 2026 The dpstream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPSTREAM_PERSIST_HPP
#define DPSTREAM_PERSIST_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "dpstream/active.hpp"
#include "dpstream/dpgmm.hpp"
#include "dpstream/eval.hpp"
#include "dpstream/nnmf.hpp"
#include "dpstream/particle.hpp"
#include "dpstream/records.hpp"

namespace dpstream::persist {

using nlohmann::json;

inline constexpr const char* kFormat = "dpstream";
inline constexpr int kVersion = 1;

// Doubles are written in shortest round-trip form; inf and nan as strings.
json encode(double v);
double decode_double(const json& j);

json encode(const Vector& v);
Vector decode_vector(const json& j);

json encode(const Matrix& m);
Matrix decode_matrix(const json& j);

json encode(const NIWHyper& h);
NIWHyper decode_hyper(const json& j);

json encode(const ClassTable& t);
ClassTable decode_table(const json& j);

json encode(const ModelState& m);
ModelState decode_model(const json& j);

json encode(const Ensemble& e);
Ensemble decode_ensemble(const json& j);

json encode(const FeatureVocabulary& v);
FeatureVocabulary decode_vocabulary(const json& j);

json encode(const Basis& b);
Basis decode_basis(const json& j);

json encode(const LatentDataset& d);
LatentDataset decode_dataset(const json& j);

json encode(const LabelDistribution& d);
LabelDistribution decode_distribution(const json& j);

json encode(const QueryEvent& q);
QueryEvent decode_query(const json& j);

json encode(const RawRecord& r);

/// {"format", "version", "kind", "body"}.
json wrap(std::string_view kind, json body);
/// The body of a wrapped document. Throws DataError on a foreign format, a
/// different kind or a version mismatch.
json unwrap(const json& doc, std::string_view kind);

/// Writes via a temporary file and rename, so readers never see a partial
/// file. Output is byte-stable for equal values.
void write_file(const std::filesystem::path& path, const json& doc);
/// Throws DataError naming the path when it is missing or not valid JSON.
json read_file(const std::filesystem::path& path);

}  // namespace dpstream::persist

#endif  // DPSTREAM_PERSIST_HPP
