#pragma once

// Exhaustive METEOR alignment for short inputs: enumerates every partial
// matching and keeps the lexicographically best (most exact matches, then
// most stem matches, then fewest chunks).

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace oracle {

struct AlignmentSummary {
  std::size_t exact = 0;
  std::size_t stemmed = 0;
  std::size_t chunks = 0;
};

inline AlignmentSummary best_alignment(
    const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
    const std::function<std::string(const std::string&)>& stem) {
  AlignmentSummary best;
  bool have = false;
  std::vector<long> match(hyp.size(), -1);
  std::vector<bool> used(ref.size(), false);

  std::function<void(std::size_t, std::size_t, std::size_t)> go =
      [&](std::size_t i, std::size_t exact, std::size_t stemmed) {
        if (i == hyp.size()) {
          std::size_t chunks = 0;
          long prev_i = -2, prev_j = -2;
          for (std::size_t a = 0; a < hyp.size(); ++a) {
            if (match[a] < 0) continue;
            if (!(static_cast<long>(a) == prev_i + 1 && match[a] == prev_j + 1)) ++chunks;
            prev_i = static_cast<long>(a);
            prev_j = match[a];
          }
          const AlignmentSummary s{exact, stemmed, chunks};
          const bool better =
              !have || s.exact > best.exact ||
              (s.exact == best.exact &&
               (s.stemmed > best.stemmed ||
                (s.stemmed == best.stemmed && s.chunks < best.chunks)));
          if (better) {
            best = s;
            have = true;
          }
          return;
        }
        go(i + 1, exact, stemmed);
        for (std::size_t j = 0; j < ref.size(); ++j) {
          if (used[j]) continue;
          const bool same = hyp[i] == ref[j];
          if (!same && stem(hyp[i]) != stem(ref[j])) continue;
          used[j] = true;
          match[i] = static_cast<long>(j);
          go(i + 1, exact + (same ? 1 : 0), stemmed + (same ? 0 : 1));
          match[i] = -1;
          used[j] = false;
        }
      };
  go(0, 0, 0);
  return best;
}

inline double meteor_from(const AlignmentSummary& a, std::size_t hyp_len,
                          std::size_t ref_len) {
  const double m = static_cast<double>(a.exact + a.stemmed);
  if (m == 0.0) return 0.0;
  const double p = m / static_cast<double>(hyp_len);
  const double r = m / static_cast<double>(ref_len);
  const double fmean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(a.chunks) / m;
  return fmean * (1.0 - 0.5 * frag * frag * frag);
}

}  // namespace oracle
