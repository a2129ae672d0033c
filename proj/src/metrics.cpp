#include "ecsrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "ecsrl/errors.hpp"

namespace ecsrl {

namespace {

std::map<TokenSeq, int> ngram_counts(const TokenSeq& seq, int n) {
  std::map<TokenSeq, int> counts;
  if (static_cast<int>(seq.size()) >= n) {
    for (size_t i = 0; i + n <= seq.size(); ++i) {
      counts[TokenSeq(seq.begin() + i, seq.begin() + i + n)] += 1;
    }
  }
  return counts;
}

void check_nonempty_questions(const std::vector<TokenSeq>& questions, const char* who) {
  if (questions.empty()) {
    throw ValueError(std::string(who) + ": dialogue has no questions");
  }
  for (const TokenSeq& q : questions) {
    if (q.empty()) throw ValueError(std::string(who) + ": empty question sequence");
  }
}

}  // namespace

int unique_question(const std::vector<TokenSeq>& questions) {
  check_nonempty_questions(questions, "unique_question");
  std::set<TokenSeq> distinct(questions.begin(), questions.end());
  return static_cast<int>(distinct.size());
}

double bleu4(const TokenSeq& hyp, const std::vector<TokenSeq>& refs) {
  if (hyp.empty()) throw ValueError("bleu4: empty question sequence");
  if (refs.empty()) throw ValueError("bleu4: empty reference set");
  for (const TokenSeq& r : refs) {
    if (r.empty()) throw ValueError("bleu4: empty reference sequence");
  }

  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    std::map<TokenSeq, int> hyp_counts = ngram_counts(hyp, n);
    int total = 0;
    int matched = 0;
    for (const auto& [gram, count] : hyp_counts) {
      total += count;
      int best = 0;
      for (const TokenSeq& r : refs) {
        auto rc = ngram_counts(r, n);
        auto it = rc.find(gram);
        if (it != rc.end()) best = std::max(best, it->second);
      }
      matched += std::min(count, best);
    }
    double p;
    if (n == 1) {
      p = total > 0 ? static_cast<double>(matched) / total : 0.0;
      if (p == 0.0) return 0.0;
    } else {
      p = (matched + 1.0) / (total + 1.0);
    }
    log_sum += 0.25 * std::log(p);
  }

  // brevity penalty against the closest reference length (ties -> shorter)
  auto c = static_cast<double>(hyp.size());
  double r = static_cast<double>(refs[0].size());
  for (const TokenSeq& ref : refs) {
    double len = static_cast<double>(ref.size());
    if (std::abs(len - c) < std::abs(r - c) ||
        (std::abs(len - c) == std::abs(r - c) && len < r)) {
      r = len;
    }
  }
  double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum);
}

double mutual_overlap(const std::vector<TokenSeq>& questions) {
  check_nonempty_questions(questions, "mutual_overlap");
  if (questions.size() == 1) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < questions.size(); ++i) {
    std::vector<TokenSeq> refs;
    refs.reserve(questions.size() - 1);
    for (size_t j = 0; j < questions.size(); ++j) {
      if (j != i) refs.push_back(questions[j]);
    }
    sum += bleu4(questions[i], refs);
  }
  return sum / questions.size();
}

double dist_n(const std::vector<TokenSeq>& corpus, int n) {
  if (n < 1) throw ValueError("dist_n: n must be positive");
  if (corpus.empty()) throw ValueError("dist_n: empty corpus");
  long total_tokens = 0;
  std::set<TokenSeq> grams;
  for (const TokenSeq& seq : corpus) {
    total_tokens += static_cast<long>(seq.size());
    for (const auto& [gram, count] : ngram_counts(seq, n)) grams.insert(gram);
  }
  if (total_tokens == 0) throw ValueError("dist_n: corpus has no tokens");
  return static_cast<double>(grams.size()) / static_cast<double>(total_tokens);
}

double ent_n(const std::vector<TokenSeq>& corpus, int n, bool token_normalized) {
  if (n < 1) throw ValueError("ent_n: n must be positive");
  if (corpus.empty()) throw ValueError("ent_n: empty corpus");
  std::map<TokenSeq, long> counts;
  long total_tokens = 0;
  long total_grams = 0;
  for (const TokenSeq& seq : corpus) {
    total_tokens += static_cast<long>(seq.size());
    for (const auto& [gram, count] : ngram_counts(seq, n)) {
      counts[gram] += count;
      total_grams += count;
    }
  }
  if (total_grams == 0) throw ValueError("ent_n: no n-grams of order " + std::to_string(n));
  double h = 0.0;
  for (const auto& [gram, count] : counts) {
    double f = static_cast<double>(count) / static_cast<double>(total_grams);
    h -= f * std::log(f);
  }
  return token_normalized ? h / static_cast<double>(total_tokens) : h;
}

int rank_of_target(const Eigen::VectorXd& prediction,
                   const std::vector<Eigen::VectorXd>& pool, int target_index) {
  if (pool.size() < 2) throw ValueError("rank_of_target: pool needs at least 2 entries");
  if (target_index < 0 || target_index >= static_cast<int>(pool.size())) {
    throw ValueError("rank_of_target: target index out of range");
  }
  double target_dist = 0.0;
  std::vector<double> dists(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].size() != prediction.size()) {
      throw DimensionError("rank_of_target: pool entry dimension mismatch");
    }
    dists[i] = (pool[i] - prediction).squaredNorm();
  }
  target_dist = dists[target_index];
  int rank = 1;
  for (size_t i = 0; i < pool.size(); ++i) {
    if (static_cast<int>(i) == target_index) continue;
    if (dists[i] < target_dist ||
        (dists[i] == target_dist && static_cast<int>(i) < target_index)) {
      ++rank;
    }
  }
  return rank;
}

double pmr_from_rank(int rank, int pool_size) {
  if (pool_size < 1) throw ValueError("pmr_from_rank: pool needs at least 1 entry");
  if (rank < 1 || rank > pool_size) throw ValueError("pmr_from_rank: rank out of range");
  if (pool_size == 1) return 100.0;  // a lone candidate is trivially top-ranked
  return 100.0 * (1.0 - static_cast<double>(rank - 1) / (pool_size - 1));
}

double pmr(const Eigen::VectorXd& prediction, const std::vector<Eigen::VectorXd>& pool,
           int target_index) {
  return pmr_from_rank(rank_of_target(prediction, pool, target_index),
                       static_cast<int>(pool.size()));
}

RankMetrics rank_metrics(const std::vector<int>& ranks, const std::vector<int>& cutoffs) {
  if (ranks.empty()) throw ValueError("rank_metrics: no ranks given");
  for (int c : cutoffs) {
    if (c < 1) throw ValueError("rank_metrics: cutoffs must be positive");
  }
  RankMetrics out;
  out.recall_at.assign(cutoffs.size(), 0.0);
  for (int r : ranks) {
    if (r < 1) throw ValueError("rank_metrics: ranks are 1-based");
    out.mrr += 1.0 / r;
    for (size_t i = 0; i < cutoffs.size(); ++i) {
      if (r <= cutoffs[i]) out.recall_at[i] += 1.0;
    }
  }
  out.mrr /= ranks.size();
  for (double& v : out.recall_at) v /= ranks.size();
  return out;
}

}  // namespace ecsrl
