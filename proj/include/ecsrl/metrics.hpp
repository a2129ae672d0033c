#pragma once

#include <Eigen/Core>
#include <vector>

namespace ecsrl {

using TokenSeq = std::vector<int>;

// Number of distinct question token sequences in one dialogue.
int unique_question(const std::vector<TokenSeq>& questions);

// BLEU with uniform weights over orders 1..4, clipped multi-reference
// precision, closest-reference brevity penalty and add-one smoothing on the
// higher orders (unigram precision stays raw, so disjoint token sets score
// exactly zero).
double bleu4(const TokenSeq& hyp, const std::vector<TokenSeq>& refs);

// Mean over the dialogue's questions of BLEU against the other questions.
// High values mean the dialogue keeps paraphrasing itself.
double mutual_overlap(const std::vector<TokenSeq>& questions);

// Distinct n-grams divided by total token count, over a corpus of sequences.
double dist_n(const std::vector<TokenSeq>& corpus, int n);

// Shannon entropy (nats) of the n-gram frequency distribution. The
// token-normalized variant divides by the total token count.
double ent_n(const std::vector<TokenSeq>& corpus, int n, bool token_normalized = false);

// 1-based rank of pool[target_index] when the pool is sorted by squared
// distance to the prediction, ascending, ties broken by pool index.
int rank_of_target(const Eigen::VectorXd& prediction,
                   const std::vector<Eigen::VectorXd>& pool, int target_index);

// Percentile mean rank on a 0..100 scale: 100 when the target ranks first,
// 0 when it ranks last.
double pmr_from_rank(int rank, int pool_size);

double pmr(const Eigen::VectorXd& prediction, const std::vector<Eigen::VectorXd>& pool,
           int target_index);

struct RankMetrics {
  double mrr = 0.0;
  std::vector<double> recall_at;  // aligned with the requested cutoffs
};

RankMetrics rank_metrics(const std::vector<int>& ranks, const std::vector<int>& cutoffs);

}  // namespace ecsrl
