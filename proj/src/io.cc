/*
 * Copyright 2026 The dpsynth Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dpsynth/io.h"

#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"

namespace dpsynth {
namespace {

bool IsBlank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

// Calls fn(json, line_no) for each non-blank line of a JSONL file.
template <typename Fn>
absl::Status ForEachJsonLine(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    try {
      if (absl::Status s = fn(nlohmann::json::parse(line)); !s.ok()) {
        return absl::DataLossError(absl::StrCat(path, ":", line_no, ": ", s.message()));
      }
    } catch (const nlohmann::json::exception& e) {
      return absl::DataLossError(absl::StrCat(path, ":", line_no, ": ", e.what()));
    }
  }
  return absl::OkStatus();
}

std::string IdString(const nlohmann::json& id) {
  return id.is_string() ? id.get<std::string>() : id.dump();
}

}  // namespace

absl::StatusOr<std::vector<SeedRecord>> ReadSeedsJsonl(const std::string& path) {
  std::vector<SeedRecord> seeds;
  absl::Status s = ForEachJsonLine(path, [&](const nlohmann::json& j) {
    SeedRecord seed;
    seed.id = IdString(j.at("id"));
    seed.text = j.at("text").get<std::string>();
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
      seed.label = IdString(*it);
    }
    seeds.push_back(std::move(seed));
    return absl::OkStatus();
  });
  if (!s.ok()) return s;
  return seeds;
}

absl::Status TokenizeSeeds(std::vector<SeedRecord>& seeds,
                           const Vocabulary& vocab, Tokenization mode) {
  for (SeedRecord& seed : seeds) {
    absl::StatusOr<std::vector<TokenId>> ids = vocab.Encode(Tokenize(seed.text, mode));
    if (!ids.ok()) {
      return absl::DataLossError(absl::StrCat("seed '", seed.id, "': ", ids.status().message()));
    }
    seed.tokens = *std::move(ids);
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<NamedEmbedding>> ReadEmbeddingsJsonl(
    const std::string& path) {
  std::vector<NamedEmbedding> out;
  absl::Status s = ForEachJsonLine(path, [&](const nlohmann::json& j) {
    std::vector<double> vec = j.at("vec").get<std::vector<double>>();
    if (vec.empty()) return absl::InvalidArgumentError("empty embedding");
    if (!out.empty() && vec.size() != static_cast<std::size_t>(out.front().vec.size())) {
      return absl::InvalidArgumentError("embedding dimension differs from earlier records");
    }
    Embedding e = Eigen::Map<const Embedding>(vec.data(), static_cast<Eigen::Index>(vec.size()));
    if (!e.allFinite()) return absl::InvalidArgumentError("non-finite embedding");
    out.push_back({IdString(j.at("id")), std::move(e)});
    return absl::OkStatus();
  });
  if (!s.ok()) return s;
  return out;
}

absl::StatusOr<std::vector<std::string>> ReadLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!IsBlank(line)) lines.push_back(line);
  }
  return lines;
}

absl::StatusOr<Vocabulary> ReadVocabularyFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.empty() || lines[0] != Vocabulary::kEosToken) {
    return absl::DataLossError(absl::StrCat(path, ": first token must be ", std::string(Vocabulary::kEosToken)));
  }
  const bool with_unk = lines.size() > 1 && lines[1] == Vocabulary::kUnkToken;
  Vocabulary vocab(with_unk);
  for (std::size_t i = static_cast<std::size_t>(vocab.size()); i < lines.size(); ++i) {
    absl::StatusOr<TokenId> id = vocab.Add(lines[i]);
    if (!id.ok() || *id != static_cast<TokenId>(i)) {
      return absl::DataLossError(absl::StrCat(path, ":", i + 1, ": duplicate or reserved token '", lines[i], "'"));
    }
  }
  return vocab;
}

nlohmann::json ClusterModelToJson(const ClusterModel& model) {
  nlohmann::json centers = nlohmann::json::array();
  for (int j = 0; j < model.k(); ++j) {
    std::vector<double> c(model.centers.col(j).data(), model.centers.col(j).data() + model.dim());
    centers.push_back(std::move(c));
  }
  nlohmann::json j{{"dim", model.dim()},
                   {"k", model.k()},
                   {"source", CenterSourceName(model.source)},
                   {"clustering_epsilon", model.clustering_epsilon},
                   {"centers", std::move(centers)}};
  if (!model.parent_indices.empty()) j["parent_indices"] = model.parent_indices;
  return j;
}

absl::StatusOr<ClusterModel> ClusterModelFromJson(const nlohmann::json& j) {
  try {
    ClusterModel model;
    const int dim = j.at("dim").get<int>();
    const int k = j.at("k").get<int>();
    const auto& centers = j.at("centers");
    if (dim < 1 || k < 1 || centers.size() != static_cast<std::size_t>(k)) {
      return absl::DataLossError("cluster model: inconsistent dim/k/centers");
    }
    model.centers.resize(dim, k);
    for (int c = 0; c < k; ++c) {
      const std::vector<double> v = centers[static_cast<std::size_t>(c)].get<std::vector<double>>();
      if (v.size() != static_cast<std::size_t>(dim)) {
        return absl::DataLossError(absl::StrCat("cluster model: center ", c, " has dimension ", v.size()));
      }
      for (int d = 0; d < dim; ++d) model.centers(d, c) = v[static_cast<std::size_t>(d)];
    }
    if (!model.centers.allFinite()) return absl::DataLossError("cluster model: non-finite center");
    // Files without a source tag come from external clustering tools.
    model.source = j.value("source", std::string("external-file")) == "public"
                       ? CenterSource::kPublic
                       : CenterSource::kExternalFile;
    model.clustering_epsilon = j.value("clustering_epsilon", 0.0);
    if (auto it = j.find("parent_indices"); it != j.end()) {
      model.parent_indices = it->get<std::vector<int>>();
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    return absl::DataLossError(absl::StrCat("cluster model: ", e.what()));
  }
}

absl::StatusOr<ClusterModel> LoadClusterModel(const std::string& path) {
  absl::StatusOr<nlohmann::json> j = ReadJsonFile(path);
  if (!j.ok()) return j.status();
  return ClusterModelFromJson(*j);
}

absl::StatusOr<std::vector<PerTokenCost>> ReadLedgerJsonl(const std::string& path) {
  std::vector<PerTokenCost> out;
  absl::Status s = ForEachJsonLine(path, [&](const nlohmann::json& j) {
    out.push_back(j.get<PerTokenCost>());
    return absl::OkStatus();
  });
  if (!s.ok()) return s;
  return out;
}

absl::StatusOr<nlohmann::json> ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    return absl::DataLossError(absl::StrCat(path, ": ", e.what()));
  }
}

absl::Status WriteTextFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << contents;
  out.close();
  if (!out) return absl::UnavailableError(absl::StrCat("error writing ", path));
  return absl::OkStatus();
}

absl::Status WriteJsonFile(const std::string& path, const nlohmann::json& j) {
  return WriteTextFile(path, j.dump(2) + "\n");
}

absl::Status WriteJsonl(const std::string& path,
                        const std::vector<nlohmann::json>& records) {
  std::string contents;
  for (const nlohmann::json& r : records) {
    contents += r.dump();
    contents += '\n';
  }
  return WriteTextFile(path, contents);
}

}  // namespace dpsynth
