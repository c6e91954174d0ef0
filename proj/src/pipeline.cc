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

#include "dpsynth/pipeline.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <iostream>
#include <memory>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "dpsynth/clustering.h"
#include "dpsynth/embedding.h"
#include "dpsynth/histogram.h"
#include "dpsynth/io.h"
#include "dpsynth/metrics.h"
#include "dpsynth/ngram_model.h"
#include "dpsynth/privacy.h"
#include "dpsynth/replay_provider.h"
#include "dpsynth/rng.h"

namespace dpsynth {
namespace {

absl::Status Require(bool ok, const char* message) {
  return ok ? absl::OkStatus() : absl::InvalidArgumentError(message);
}

absl::Status ValidateEmbeddingSource(const EmbeddingSource& source) {
  if (source.embeddings_path.empty()) {
    return Require(source.embed_dim >= 1, "--embed-dim must be >= 1");
  }
  return absl::OkStatus();
}

// Inputs enter the fingerprint by content, so moving a file keeps it.
nlohmann::json InputDigest(const std::string& path) {
  if (path.empty()) return nullptr;
  std::ifstream in(path, std::ios::binary);
  if (!in) return "unreadable";
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(Fnv1a64(bytes)));
  return std::string(buf);
}

nlohmann::json EmbeddingSourceJson(const EmbeddingSource& source) {
  if (!source.embeddings_path.empty()) return {{"file", InputDigest(source.embeddings_path)}};
  return {{"toy_embed_dim", source.embed_dim}};
}

// dim x n matrix of embeddings for (id, text) pairs.
absl::StatusOr<Eigen::MatrixXd> EmbedTexts(const std::vector<std::string>& ids,
                                           const std::vector<std::string>& texts,
                                           const EmbeddingSource& source) {
  const auto n = static_cast<Eigen::Index>(texts.size());
  if (source.embeddings_path.empty()) {
    Eigen::MatrixXd out(source.embed_dim, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      absl::StatusOr<Embedding> e = ToyEmbed(texts[static_cast<std::size_t>(i)], source.embed_dim);
      if (!e.ok()) {
        return absl::DataLossError(absl::StrCat("record '", ids[static_cast<std::size_t>(i)], "': ", e.status().message()));
      }
      out.col(i) = *e;
    }
    return out;
  }
  absl::StatusOr<std::vector<NamedEmbedding>> file = ReadEmbeddingsJsonl(source.embeddings_path);
  if (!file.ok()) return file.status();
  std::unordered_map<std::string, const Embedding*> by_id;
  for (const NamedEmbedding& e : *file) by_id[e.id] = &e.vec;
  if (n == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::Index dim = file->empty() ? 0 : file->front().vec.size();
  Eigen::MatrixXd out(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto it = by_id.find(ids[static_cast<std::size_t>(i)]);
    if (it == by_id.end()) {
      return absl::DataLossError(absl::StrCat(source.embeddings_path, ": no embedding for id '", ids[static_cast<std::size_t>(i)], "'"));
    }
    out.col(i) = *it->second;
  }
  return out;
}

absl::StatusOr<Eigen::MatrixXd> EmbedSeeds(const std::vector<SeedRecord>& seeds,
                                           const EmbeddingSource& source) {
  std::vector<std::string> ids, texts;
  for (const SeedRecord& s : seeds) {
    ids.push_back(s.id);
    texts.push_back(s.text);
  }
  return EmbedTexts(ids, texts, source);
}

absl::Status CheckDim(const ClusterModel& model, const Eigen::MatrixXd& points) {
  if (points.cols() > 0 && points.rows() != model.dim()) {
    return absl::DataLossError(absl::StrCat("embedding dimension ", points.rows(), " does not match cluster model dimension ", model.dim()));
  }
  return absl::OkStatus();
}

// Anything failing after validation is a data problem.
absl::Status AsDataError(const absl::Status& s) {
  if (s.ok() || !absl::IsInvalidArgument(s)) return s;
  return absl::DataLossError(s.message());
}

struct LoadedProvider {
  std::unique_ptr<LogitProvider> provider;
  std::optional<Vocabulary> vocab;
};

absl::StatusOr<LoadedProvider> LoadProvider(const GenerateOptions& options,
                                            std::vector<SeedRecord>& seeds) {
  LoadedProvider loaded;
  if (!options.lm_corpus.empty()) {
    absl::StatusOr<std::vector<std::string>> lines = ReadLines(options.lm_corpus);
    if (!lines.ok()) return lines.status();
    std::vector<std::vector<std::string>> tokenized;
    for (const std::string& line : *lines) tokenized.push_back(Tokenize(line, options.tokenization));
    Vocabulary vocab = Vocabulary::FromCorpus(tokenized, /*with_unk=*/true);
    std::vector<std::vector<TokenId>> corpus;
    for (const auto& toks : tokenized) {
      absl::StatusOr<std::vector<TokenId>> ids = vocab.Encode(toks);
      if (!ids.ok()) return ids.status();
      corpus.push_back(*std::move(ids));
    }
    absl::StatusOr<NGramModel> model =
        NGramModel::Train(corpus, vocab.size(), options.ngram_order, options.smoothing);
    if (!model.ok()) return AsDataError(model.status());
    loaded.provider = std::make_unique<NGramModel>(*std::move(model));
    loaded.vocab = std::move(vocab);
  } else {
    absl::StatusOr<ReplayProvider> replay = ReplayProvider::LoadFile(options.trace);
    if (!replay.ok()) return replay.status();
    if (replay->num_records() == 0) return absl::DataLossError("trace file has no records");
    loaded.provider = std::make_unique<ReplayProvider>(*std::move(replay));
    if (!options.vocab.empty()) {
      absl::StatusOr<Vocabulary> vocab = ReadVocabularyFile(options.vocab);
      if (!vocab.ok()) return vocab.status();
      if (vocab->size() != loaded.provider->vocab_size()) {
        return absl::DataLossError(absl::StrCat("vocabulary has ", vocab->size(), " tokens but the trace has ", loaded.provider->vocab_size(), " logits"));
      }
      loaded.vocab = *std::move(vocab);
    }
  }
  if (loaded.vocab) {
    if (absl::Status s = TokenizeSeeds(seeds, *loaded.vocab, options.tokenization); !s.ok()) return s;
  }
  return loaded;
}

std::string DecodeTokens(const std::optional<Vocabulary>& vocab,
                         std::span<const TokenId> tokens, Tokenization mode) {
  if (vocab) return vocab->Decode(tokens, mode);
  std::string out;
  for (TokenId t : tokens) {
    if (!out.empty()) out += ' ';
    out += std::to_string(t);
  }
  return out;
}

absl::Status EnsureParentDir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (parent.empty()) return absl::OkStatus();
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) return absl::UnavailableError(absl::StrCat("cannot create ", parent.string(), ": ", ec.message()));
  return absl::OkStatus();
}

}  // namespace

std::string ConfigFingerprint(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(config.dump())));
  return buf;
}

absl::Status ClusterOptions::Validate() const {
  if (absl::Status s = Require(public_embeddings.empty() != public_corpus.empty(),
                               "exactly one of --public-embeddings or --public-corpus is required");
      !s.ok()) return s;
  if (absl::Status s = Require(!out.empty(), "--out is required"); !s.ok()) return s;
  if (absl::Status s = Require(embed_dim >= 1, "--embed-dim must be >= 1"); !s.ok()) return s;
  if (absl::Status s = Require(num_clusters >= 1, "--num-clusters must be >= 1"); !s.ok()) return s;
  if (absl::Status s = Require(max_iters >= 1, "--max-iters must be >= 1"); !s.ok()) return s;
  return Require(jobs >= 1, "--jobs must be >= 1");
}

nlohmann::json ClusterOptions::ToJson() const {
  nlohmann::json source = public_embeddings.empty()
                              ? nlohmann::json{{"corpus", InputDigest(public_corpus)}, {"toy_embed_dim", embed_dim}}
                              : nlohmann::json{{"file", InputDigest(public_embeddings)}};
  return {{"command", "cluster"}, {"public", source}, {"num_clusters", num_clusters},
          {"max_iters", max_iters}, {"rng_seed", rng_seed}};
}

absl::Status RebalanceOptions::Validate() const {
  if (absl::Status s = Require(!model.empty() && !seeds.empty() && !out.empty(),
                               "--model, --seeds and --out are required");
      !s.ok()) return s;
  if (absl::Status s = ValidateEmbeddingSource(embeddings); !s.ok()) return s;
  if (absl::Status s = Require(k_prime >= 1, "--k-prime must be >= 1"); !s.ok()) return s;
  if (absl::Status s = Require(epsilon_count > 0.0 && !std::isnan(epsilon_count),
                               "--epsilon-count must be positive");
      !s.ok()) return s;
  return Require(jobs >= 1, "--jobs must be >= 1");
}

nlohmann::json RebalanceOptions::ToJson() const {
  return {{"command", "rebalance"}, {"model", InputDigest(model)}, {"seeds", InputDigest(seeds)},
          {"embeddings", EmbeddingSourceJson(embeddings)}, {"k_prime", k_prime},
          {"epsilon_count", epsilon_count}, {"rng_seed", rng_seed}};
}

absl::Status GenerateOptions::Validate() const {
  if (absl::Status s = Require(!seeds.empty() && !out_dir.empty(), "--seeds and --out-dir are required");
      !s.ok()) return s;
  if (absl::Status s = Require(lm_corpus.empty() != trace.empty(),
                               "exactly one of --lm-corpus or --trace is required");
      !s.ok()) return s;
  if (absl::Status s = Require(vocab.empty() || !trace.empty(), "--vocab only applies to --trace");
      !s.ok()) return s;
  if (!model.empty()) {
    if (absl::Status s = ValidateEmbeddingSource(embeddings); !s.ok()) return s;
  }
  if (absl::Status s = generation.Validate(); !s.ok()) return s;
  if (absl::Status s = Require(ngram_order >= 1, "--ngram-order must be >= 1"); !s.ok()) return s;
  if (absl::Status s = Require(smoothing > 0.0 && std::isfinite(smoothing), "--smoothing must be positive");
      !s.ok()) return s;
  if (absl::Status s = Require(batching.batch_size >= 1, "--batch-size must be >= 1"); !s.ok()) return s;
  if (absl::Status s = Require(batching.num_subbatches >= 1, "--num-subbatches must be >= 1"); !s.ok()) return s;
  const int min_size = generation.mode == AggregationMode::kMean ? 2 : 1;
  if (absl::Status s = Require(batching.min_batch_size >= min_size,
                               "--min-batch-size is below what the aggregation mode allows");
      !s.ok()) return s;
  if (batching.mode == BatchingMode::kFixedSize) {
    if (absl::Status s = Require(batching.batch_size >= batching.min_batch_size,
                                 "--batch-size must be >= --min-batch-size");
        !s.ok()) return s;
  }
  return Require(jobs >= 1, "--jobs must be >= 1");
}

nlohmann::json GenerateOptions::ToJson() const {
  nlohmann::json provider = lm_corpus.empty()
                                ? nlohmann::json{{"trace", InputDigest(trace)}, {"vocab", InputDigest(vocab)}}
                                : nlohmann::json{{"lm_corpus", InputDigest(lm_corpus)},
                                                 {"ngram_order", ngram_order},
                                                 {"smoothing", smoothing}};
  return {{"command", "generate"},
          {"seeds", InputDigest(seeds)},
          {"model", InputDigest(model)},
          {"embeddings", EmbeddingSourceJson(embeddings)},
          {"provider", provider},
          {"tokenization", tokenization == Tokenization::kWhitespace ? "whitespace" : "char"},
          {"mode", ModeName(generation.mode)},
          {"temperature", generation.temperature},
          {"clip", generation.clip},
          {"max_tokens", generation.max_tokens},
          {"stop_at_eos", generation.stop_at_eos},
          {"batching", batching.mode == BatchingMode::kFixedSize ? "fixed" : "random"},
          {"batch_size", batching.batch_size},
          {"num_subbatches", batching.num_subbatches},
          {"min_batch_size", batching.min_batch_size},
          {"rng_seed", generation.rng_seed}};
}

absl::Status EvaluateOptions::Validate() const {
  if (absl::Status s = Require(!model.empty() && !seeds.empty() && !out.empty(),
                               "--model, --seeds and --out are required");
      !s.ok()) return s;
  if (absl::Status s = ValidateEmbeddingSource(embeddings); !s.ok()) return s;
  if (absl::Status s = Require(histogram_bins >= 1, "--bins must be >= 1"); !s.ok()) return s;
  return Require(jobs >= 1, "--jobs must be >= 1");
}

nlohmann::json EvaluateOptions::ToJson() const {
  return {{"command", "evaluate"}, {"model", InputDigest(model)}, {"seeds", InputDigest(seeds)},
          {"embeddings", EmbeddingSourceJson(embeddings)},
          {"reference_model", InputDigest(reference_model)}, {"ledger", InputDigest(ledger)},
          {"bins", histogram_bins}};
}

absl::Status RunCluster(const ClusterOptions& options) {
  absl::StatusOr<Eigen::MatrixXd> points;
  if (!options.public_embeddings.empty()) {
    absl::StatusOr<std::vector<NamedEmbedding>> file = ReadEmbeddingsJsonl(options.public_embeddings);
    if (!file.ok()) return file.status();
    if (file->empty()) return absl::DataLossError("public embeddings file is empty");
    Eigen::MatrixXd m(file->front().vec.size(), static_cast<Eigen::Index>(file->size()));
    for (std::size_t i = 0; i < file->size(); ++i) m.col(static_cast<Eigen::Index>(i)) = (*file)[i].vec;
    points = std::move(m);
  } else {
    absl::StatusOr<std::vector<std::string>> lines = ReadLines(options.public_corpus);
    if (!lines.ok()) return lines.status();
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < lines->size(); ++i) ids.push_back(std::to_string(i));
    points = EmbedTexts(ids, *lines, {"", options.embed_dim});
  }
  if (!points.ok()) return points.status();

  absl::StatusOr<KMeansResult> km = KMeans(
      *points, {options.num_clusters, options.max_iters, options.rng_seed, options.jobs});
  if (!km.ok()) return AsDataError(km.status());

  nlohmann::json out = ClusterModelToJson(km->model);
  out["iterations"] = km->iterations;
  out["converged"] = km->converged;
  out["objective"] = km->objective_history.back();
  out["config_fingerprint"] = ConfigFingerprint(options.ToJson());
  if (absl::Status s = EnsureParentDir(options.out); !s.ok()) return s;
  return WriteJsonFile(options.out, out);
}

absl::Status RunRebalance(const RebalanceOptions& options) {
  absl::StatusOr<ClusterModel> model = LoadClusterModel(options.model);
  if (!model.ok()) return model.status();
  absl::StatusOr<std::vector<SeedRecord>> seeds = ReadSeedsJsonl(options.seeds);
  if (!seeds.ok()) return seeds.status();
  absl::StatusOr<Eigen::MatrixXd> points = EmbedSeeds(*seeds, options.embeddings);
  if (!points.ok()) return points.status();
  if (absl::Status s = CheckDim(*model, *points); !s.ok()) return s;

  absl::StatusOr<RebalanceResult> result = Rebalance(
      *model, *points, options.k_prime, options.epsilon_count, options.rng_seed, options.jobs);
  if (!result.ok()) return AsDataError(result.status());

  nlohmann::json out = ClusterModelToJson(result->model);
  out["epsilon_count"] = result->epsilon_count;
  // Noisy counts are the released statistic; true counts never leave memory.
  out["noisy_counts"] = result->noisy_counts;
  out["config_fingerprint"] = ConfigFingerprint(options.ToJson());
  if (absl::Status s = EnsureParentDir(options.out); !s.ok()) return s;
  return WriteJsonFile(options.out, out);
}

absl::Status RunGenerate(const GenerateOptions& options) {
  absl::StatusOr<std::vector<SeedRecord>> seeds = ReadSeedsJsonl(options.seeds);
  if (!seeds.ok()) return seeds.status();
  absl::StatusOr<LoadedProvider> loaded = LoadProvider(options, *seeds);
  if (!loaded.ok()) return loaded.status();

  std::vector<int> cluster_ids(seeds->size(), 0);
  double clustering_epsilon = 0.0;
  if (!options.model.empty()) {
    absl::StatusOr<ClusterModel> model = LoadClusterModel(options.model);
    if (!model.ok()) return model.status();
    absl::StatusOr<Eigen::MatrixXd> points = EmbedSeeds(*seeds, options.embeddings);
    if (!points.ok()) return points.status();
    if (absl::Status s = CheckDim(*model, *points); !s.ok()) return s;
    absl::StatusOr<std::vector<int>> assigned = AssignAll(*model, *points, options.jobs);
    if (!assigned.ok()) return AsDataError(assigned.status());
    cluster_ids = *std::move(assigned);
    clustering_epsilon = model->clustering_epsilon;
  }

  std::vector<std::optional<std::string>> labels;
  std::vector<std::string> ids;
  for (const SeedRecord& s : *seeds) {
    labels.push_back(s.label);
    ids.push_back(s.id);
  }
  BatchingOptions batching = options.batching;
  batching.rng_seed = options.generation.rng_seed;
  const BatchPlan plan = MakeBatches(cluster_ids, labels, ids, batching);

  GenerationConfig config = options.generation;
  if (loaded->vocab) config.eos = Vocabulary::kEos;
  absl::StatusOr<GenerationResult> result = GenerateAll(
      *seeds, plan, *loaded->provider, config, clustering_epsilon, options.jobs);
  if (!result.ok()) return AsDataError(result.status());

  const std::string fingerprint = ConfigFingerprint(options.ToJson());
  std::vector<nlohmann::json> synthetic;
  for (const SyntheticExample& ex : result->examples) {
    nlohmann::json j{{"id", absl::StrCat("synthetic-", ex.batch_id)},
                     {"text", DecodeTokens(loaded->vocab, ex.tokens, options.tokenization)}};
    if (ex.label) j["label"] = *ex.label;
    j["batch_id"] = ex.batch_id;
    j["cluster_id"] = ex.cluster_id;
    j["tokens"] = ex.tokens;
    j["per_token_gamma"] = ex.per_token_gamma;
    j["synthetic"] = true;
    j["config_fingerprint"] = fingerprint;
    synthetic.push_back(std::move(j));
  }
  std::vector<nlohmann::json> ledger_lines;
  for (const PerTokenCost& cost : result->ledger.costs()) ledger_lines.push_back(cost);

  nlohmann::json report = ReportToJson(LedgerReport(result->ledger));
  report["config_fingerprint"] = fingerprint;
  report["batching"] = {{"batches", plan.batches.size()},
                        {"dropped_seeds", plan.dropped_seeds.size()},
                        {"empty_subbatches", plan.empty_subbatches},
                        {"skipped_batches", result->skipped_batches}};

  if (!plan.dropped_seeds.empty()) {
    std::clog << "dpsynth: dropped " << plan.dropped_seeds.size()
              << " seeds in undersized trailing batches\n";
  }
  if (!result->skipped_batches.empty()) {
    std::clog << "dpsynth: skipped " << result->skipped_batches.size()
              << " batches too small for " << ModeName(config.mode) << " aggregation\n";
  }

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) return absl::UnavailableError(absl::StrCat("cannot create ", options.out_dir, ": ", ec.message()));
  const std::filesystem::path dir(options.out_dir);
  if (absl::Status s = WriteJsonl((dir / kSyntheticFile).string(), synthetic); !s.ok()) return s;
  if (absl::Status s = WriteJsonl((dir / kLedgerFile).string(), ledger_lines); !s.ok()) return s;
  return WriteJsonFile((dir / kReportFile).string(), report);
}

absl::Status RunEvaluate(const EvaluateOptions& options) {
  absl::StatusOr<ClusterModel> model = LoadClusterModel(options.model);
  if (!model.ok()) return model.status();
  absl::StatusOr<std::vector<SeedRecord>> seeds = ReadSeedsJsonl(options.seeds);
  if (!seeds.ok()) return seeds.status();
  absl::StatusOr<Eigen::MatrixXd> points = EmbedSeeds(*seeds, options.embeddings);
  if (!points.ok()) return points.status();
  if (absl::Status s = CheckDim(*model, *points); !s.ok()) return s;
  absl::StatusOr<std::vector<int>> predicted = AssignAll(*model, *points, options.jobs);
  if (!predicted.ok()) return AsDataError(predicted.status());

  std::vector<int> reference;
  if (!options.reference_model.empty()) {
    absl::StatusOr<ClusterModel> ref = LoadClusterModel(options.reference_model);
    if (!ref.ok()) return ref.status();
    if (absl::Status s = CheckDim(*ref, *points); !s.ok()) return s;
    absl::StatusOr<std::vector<int>> assigned = AssignAll(*ref, *points, options.jobs);
    if (!assigned.ok()) return AsDataError(assigned.status());
    reference = *std::move(assigned);
  } else {
    std::vector<std::string> labels;
    for (const SeedRecord& s : *seeds) {
      if (!s.label) {
        return absl::DataLossError(absl::StrCat("seed '", s.id, "' has no label and no --reference-model was given"));
      }
      labels.push_back(*s.label);
    }
    reference = EncodeLabels(labels);
  }
  absl::StatusOr<VMeasure> v = ComputeVMeasure(*predicted, reference);
  if (!v.ok()) return AsDataError(v.status());

  const std::vector<std::size_t> sizes = ClusterSizes(*predicted, model->k());
  std::vector<double> size_values(sizes.begin(), sizes.end());
  std::size_t at_least_100 = 0, non_singleton = 0;
  for (std::size_t s : sizes) {
    at_least_100 += s >= 100;
    non_singleton += s > 1;
  }

  nlohmann::json out{{"num_seeds", seeds->size()},
                     {"num_clusters", model->k()},
                     {"homogeneity", v->homogeneity},
                     {"completeness", v->completeness},
                     {"v_measure", v->v_measure},
                     {"cluster_sizes", sizes},
                     {"non_singleton_clusters", non_singleton},
                     {"clusters_at_least_100", at_least_100},
                     {"cluster_size_histogram", MakeHistogram(size_values, options.histogram_bins)}};

  if (!options.ledger.empty()) {
    absl::StatusOr<std::vector<PerTokenCost>> records = ReadLedgerJsonl(options.ledger);
    if (!records.ok()) return records.status();
    PrivacyLedger ledger(AggregationMode::kMedian, 1.0, 1.0);
    for (const PerTokenCost& c : *records) ledger.Append(c);
    const PrivacyReport report = LedgerReport(ledger, options.histogram_bins);
    out["generation_epsilon"] = report.generation_epsilon;
    out["per_batch_epsilon_histogram"] = report.per_batch_histogram;
    out["per_position_mean_gamma"] = report.per_position_mean_gamma;
  }
  out["config_fingerprint"] = ConfigFingerprint(options.ToJson());
  if (absl::Status s = EnsureParentDir(options.out); !s.ok()) return s;
  return WriteJsonFile(options.out, out);
}

}  // namespace dpsynth
