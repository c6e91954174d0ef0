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

// The cluster / rebalance / generate / evaluate pipeline behind the CLI.
//
// Each command has an options struct with Validate(), which reports
// configuration problems as InvalidArgument, and a Run function whose
// failures are data problems (missing or malformed inputs).

#ifndef DPSYNTH_PIPELINE_H_
#define DPSYNTH_PIPELINE_H_

#include <cstdint>
#include <string>

#include "absl/status/status.h"
#include "dpsynth/batching.h"
#include "dpsynth/engine.h"
#include "dpsynth/vocabulary.h"
#include "json.hpp"

namespace dpsynth {

inline constexpr double kDefaultEpsilonCount = 0.1;

// Where seed/public embeddings come from: a JSONL file keyed by id, or the
// built-in toy embedder applied to each text.
struct EmbeddingSource {
  std::string embeddings_path;
  int embed_dim = 64;
};

struct ClusterOptions {
  std::string public_embeddings;  // JSONL {"id", "vec"}
  std::string public_corpus;      // plain text, embedded with ToyEmbed
  int embed_dim = 64;
  int num_clusters = 1000;
  int max_iters = 100;
  std::uint64_t rng_seed = 0;
  int jobs = 1;
  std::string out;

  absl::Status Validate() const;
  nlohmann::json ToJson() const;
};

struct RebalanceOptions {
  std::string model;
  std::string seeds;
  EmbeddingSource embeddings;
  int k_prime = 60;
  double epsilon_count = kDefaultEpsilonCount;
  std::uint64_t rng_seed = 0;
  int jobs = 1;
  std::string out;

  absl::Status Validate() const;
  nlohmann::json ToJson() const;
};

struct GenerateOptions {
  std::string seeds;
  std::string model;  // optional; without it every seed is in cluster 0
  EmbeddingSource embeddings;
  // Exactly one provider: an n-gram model trained on a public corpus, or a
  // recorded logits trace (with an optional vocabulary file for decoding).
  std::string lm_corpus;
  std::string trace;
  std::string vocab;
  Tokenization tokenization = Tokenization::kWhitespace;
  int ngram_order = 3;
  double smoothing = 1.0;
  GenerationConfig generation;
  BatchingOptions batching;
  int jobs = 1;
  std::string out_dir;

  absl::Status Validate() const;
  nlohmann::json ToJson() const;
};

struct EvaluateOptions {
  std::string model;
  std::string seeds;
  EmbeddingSource embeddings;
  // Reference partition: the nearest centers of this model, or the seeds'
  // "label" field when empty.
  std::string reference_model;
  std::string ledger;  // optional ledger.jsonl from generate
  int histogram_bins = 20;
  int jobs = 1;
  std::string out;

  absl::Status Validate() const;
  nlohmann::json ToJson() const;
};

// 16 hex digits identifying a command and its configuration. ToJson()
// records input files by a digest of their contents and omits output paths
// and --jobs.
std::string ConfigFingerprint(const nlohmann::json& config);

absl::Status RunCluster(const ClusterOptions& options);
absl::Status RunRebalance(const RebalanceOptions& options);
absl::Status RunGenerate(const GenerateOptions& options);
absl::Status RunEvaluate(const EvaluateOptions& options);

// Output file names inside GenerateOptions::out_dir.
inline constexpr char kSyntheticFile[] = "synthetic.jsonl";
inline constexpr char kReportFile[] = "privacy_report.json";
inline constexpr char kLedgerFile[] = "ledger.jsonl";

}  // namespace dpsynth

#endif  // DPSYNTH_PIPELINE_H_
