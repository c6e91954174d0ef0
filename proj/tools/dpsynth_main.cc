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

// dpsynth: differentially private synthetic text from clustered seed batches.
//
//   dpsynth cluster   --public-corpus public.txt --num-clusters 50 --out centers.json
//   dpsynth rebalance --model centers.json --seeds seeds.jsonl --k-prime 10 --out rebalanced.json
//   dpsynth generate  --seeds seeds.jsonl --model rebalanced.json --lm-corpus public.txt --out-dir out/
//   dpsynth evaluate  --model rebalanced.json --seeds seeds.jsonl --ledger out/ledger.jsonl --out metrics.json
//
// Exit codes: 0 ok, 2 configuration error, 3 data error.

#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "dpsynth/pipeline.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void AddEmbeddingFlags(CLI::App* cmd, dpsynth::EmbeddingSource& source) {
  cmd->add_option("--embeddings", source.embeddings_path,
                  "Seed embeddings JSONL {id, vec}; toy embedder when omitted");
  cmd->add_option("--embed-dim", source.embed_dim, "Toy embedding dimension")
      ->capture_default_str();
}

template <typename Options, typename RunFn>
int Execute(const Options& options, RunFn run) {
  if (absl::Status s = options.Validate(); !s.ok()) {
    std::cerr << "dpsynth: configuration error: " << s.message() << "\n";
    return kExitConfig;
  }
  if (absl::Status s = run(options); !s.ok()) {
    std::cerr << "dpsynth: " << s.message() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthetic text generation"};
  app.require_subcommand(1);

  dpsynth::ClusterOptions cluster;
  CLI::App* cluster_cmd = app.add_subcommand("cluster", "k-means on public embeddings (no privacy cost)");
  cluster_cmd->add_option("--public-embeddings", cluster.public_embeddings, "Public embeddings JSONL {id, vec}");
  cluster_cmd->add_option("--public-corpus", cluster.public_corpus, "Public corpus, one text per line (toy-embedded)");
  cluster_cmd->add_option("--embed-dim", cluster.embed_dim, "Toy embedding dimension")->capture_default_str();
  cluster_cmd->add_option("--num-clusters,-k", cluster.num_clusters, "Number of centers")->capture_default_str();
  cluster_cmd->add_option("--max-iters", cluster.max_iters, "Lloyd iterations")->capture_default_str();
  cluster_cmd->add_option("--rng-seed", cluster.rng_seed)->capture_default_str();
  cluster_cmd->add_option("--jobs", cluster.jobs)->capture_default_str();
  cluster_cmd->add_option("--out", cluster.out, "Cluster model JSON");

  dpsynth::RebalanceOptions rebalance;
  CLI::App* rebalance_cmd = app.add_subcommand("rebalance", "Keep the k' centers with the highest noisy seed counts");
  rebalance_cmd->add_option("--model", rebalance.model, "Cluster model JSON");
  rebalance_cmd->add_option("--seeds", rebalance.seeds, "Seeds JSONL {id, text, label?}");
  AddEmbeddingFlags(rebalance_cmd, rebalance.embeddings);
  rebalance_cmd->add_option("--k-prime", rebalance.k_prime)->capture_default_str();
  rebalance_cmd->add_option("--epsilon-count", rebalance.epsilon_count, "Privacy cost of the noisy counts")
      ->capture_default_str();
  rebalance_cmd->add_option("--rng-seed", rebalance.rng_seed)->capture_default_str();
  rebalance_cmd->add_option("--jobs", rebalance.jobs)->capture_default_str();
  rebalance_cmd->add_option("--out", rebalance.out, "Rebalanced cluster model JSON");

  dpsynth::GenerateOptions generate;
  std::string mode_name = "median";
  std::string tokenization_name = "whitespace";
  std::optional<double> clip;
  int num_subbatches = 0;
  CLI::App* generate_cmd = app.add_subcommand("generate", "Generate one synthetic example per batch");
  generate_cmd->add_option("--seeds", generate.seeds, "Seeds JSONL {id, text, label?}");
  generate_cmd->add_option("--model", generate.model, "Cluster model JSON (omit for a single cluster)");
  AddEmbeddingFlags(generate_cmd, generate.embeddings);
  generate_cmd->add_option("--lm-corpus", generate.lm_corpus, "Public corpus for the n-gram model");
  generate_cmd->add_option("--trace", generate.trace, "Recorded logits JSONL {seed_id, prefix, logits}");
  generate_cmd->add_option("--vocab", generate.vocab, "Vocabulary file for --trace, one token per line");
  generate_cmd->add_option("--tokenize", tokenization_name, "whitespace or char")->capture_default_str();
  generate_cmd->add_option("--ngram-order", generate.ngram_order)->capture_default_str();
  generate_cmd->add_option("--smoothing", generate.smoothing, "Add-lambda smoothing")->capture_default_str();
  generate_cmd->add_option("--mode", mode_name, "mean or median")->capture_default_str();
  generate_cmd->add_option("--clip-c", clip, "Clip bound (default 9 for mean, 6 for median)");
  generate_cmd->add_option("--temperature", generate.generation.temperature)->capture_default_str();
  generate_cmd->add_option("--max-tokens", generate.generation.max_tokens)->capture_default_str();
  generate_cmd->add_option("--batch-size", generate.batching.batch_size, "Fixed batch size")->capture_default_str();
  generate_cmd->add_option("--num-subbatches", num_subbatches,
                           "Assign seeds to b random sub-batches per cluster instead of fixed-size batches");
  generate_cmd->add_option("--min-batch-size", generate.batching.min_batch_size)->capture_default_str();
  generate_cmd->add_option("--rng-seed", generate.generation.rng_seed)->capture_default_str();
  generate_cmd->add_option("--jobs", generate.jobs)->capture_default_str();
  generate_cmd->add_flag("--stop-at-eos,!--no-stop-at-eos", generate.generation.stop_at_eos,
                         "Stop a batch early when EOS is drawn")->capture_default_str();
  generate_cmd->add_option("--out-dir", generate.out_dir);

  dpsynth::EvaluateOptions evaluate;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "V-measure, cluster sizes and epsilon histograms");
  evaluate_cmd->add_option("--model", evaluate.model, "Cluster model JSON to evaluate");
  evaluate_cmd->add_option("--seeds", evaluate.seeds, "Seeds JSONL {id, text, label?}");
  AddEmbeddingFlags(evaluate_cmd, evaluate.embeddings);
  evaluate_cmd->add_option("--reference-model", evaluate.reference_model,
                           "Reference clustering (defaults to the seeds' labels)");
  evaluate_cmd->add_option("--ledger", evaluate.ledger, "ledger.jsonl written by generate");
  evaluate_cmd->add_option("--bins", evaluate.histogram_bins)->capture_default_str();
  evaluate_cmd->add_option("--jobs", evaluate.jobs)->capture_default_str();
  evaluate_cmd->add_option("--out", evaluate.out, "Metrics JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*cluster_cmd) return Execute(cluster, dpsynth::RunCluster);
  if (*rebalance_cmd) return Execute(rebalance, dpsynth::RunRebalance);
  if (*evaluate_cmd) return Execute(evaluate, dpsynth::RunEvaluate);

  absl::StatusOr<dpsynth::AggregationMode> mode = dpsynth::ParseMode(mode_name);
  absl::StatusOr<dpsynth::Tokenization> tokenization = dpsynth::ParseTokenization(tokenization_name);
  if (!mode.ok() || !tokenization.ok()) {
    std::cerr << "dpsynth: configuration error: "
              << (mode.ok() ? tokenization.status() : mode.status()).message() << "\n";
    return kExitConfig;
  }
  generate.generation.mode = *mode;
  generate.tokenization = *tokenization;
  generate.generation.clip = clip.value_or(*mode == dpsynth::AggregationMode::kMean
                                               ? dpsynth::kDefaultMeanClip
                                               : dpsynth::kDefaultMedianClip);
  if (num_subbatches > 0) {
    generate.batching.mode = dpsynth::BatchingMode::kRandomSubbatches;
    generate.batching.num_subbatches = num_subbatches;
  }
  return Execute(generate, dpsynth::RunGenerate);
}
