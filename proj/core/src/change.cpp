#include "hcd/change.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace hcd {

namespace {

void validate_params(const ChangeParams& p) {
  if (p.tau_split <= 0.0 || p.tau_split > 0.5)
    throw std::invalid_argument("tau_split must be in (0, 0.5]");
  if (p.tau_merge <= 0.0 || p.tau_merge > 0.5)
    throw std::invalid_argument("tau_merge must be in (0, 0.5]");
}

}  // namespace

ContingencyTable contingency(const std::vector<int>& labels_a,
                             const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size())
    throw std::invalid_argument("contingency: label vectors differ in length");
  ContingencyTable t;
  for (int l : labels_a) t.rows = std::max(t.rows, l + 1);
  for (int l : labels_b) t.cols = std::max(t.cols, l + 1);
  t.counts.assign(static_cast<std::size_t>(t.rows) * t.cols, 0);
  t.row_sums.assign(static_cast<std::size_t>(t.rows), 0);
  t.col_sums.assign(static_cast<std::size_t>(t.cols), 0);
  for (std::size_t j = 0; j < labels_a.size(); ++j) {
    const int a = labels_a[j], b = labels_b[j];
    if (a < 0 || b < 0) throw std::invalid_argument("contingency: negative label");
    ++t.counts[static_cast<std::size_t>(a) * t.cols + b];
    ++t.row_sums[static_cast<std::size_t>(a)];
    ++t.col_sums[static_cast<std::size_t>(b)];
  }
  return t;
}

std::vector<ChangeEvent> detect_splits(const std::vector<int>& p_opt,
                                       const std::vector<int>& p_st,
                                       const ChangeParams& params,
                                       const std::vector<int>* p_sar) {
  validate_params(params);
  const ContingencyTable t = contingency(p_opt, p_st);
  std::vector<ChangeEvent> events;

  for (int i = 0; i < t.rows; ++i) {
    if (t.row_sums[static_cast<std::size_t>(i)] == 0) continue;
    const double total = static_cast<double>(t.row_sums[static_cast<std::size_t>(i)]);
    std::vector<int> fragments;
    for (int s = 0; s < t.cols; ++s)
      if (static_cast<double>(t.at(i, s)) / total >= params.tau_split)
        fragments.push_back(s);
    if (fragments.size() < 2) continue;

    // Largest overlap retained; ties keep the lowest stacked id.
    int retained = fragments.front();
    for (int s : fragments)
      if (t.at(i, s) > t.at(i, retained)) retained = s;

    if (params.strict_split && p_sar != nullptr) {
      // Majority SAR label per fragment; a "split" whose fragments all land
      // in one SAR cluster is discarded.
      std::vector<int> majorities;
      for (int s : fragments) {
        std::map<int, long long> votes;
        for (std::size_t j = 0; j < p_opt.size(); ++j)
          if (p_opt[j] == i && p_st[j] == s) ++votes[(*p_sar)[j]];
        int best = -1;
        long long best_n = -1;
        for (const auto& [lab, cnt] : votes)
          if (cnt > best_n) {
            best_n = cnt;
            best = lab;
          }
        majorities.push_back(best);
      }
      std::sort(majorities.begin(), majorities.end());
      if (std::unique(majorities.begin(), majorities.end()) == majorities.begin() + 1)
        continue;
    }

    ChangeEvent ev;
    ev.kind = ChangeEvent::Kind::split;
    ev.source = i;
    ev.involved = fragments;
    for (std::size_t j = 0; j < p_opt.size(); ++j) {
      if (p_opt[j] != i) continue;
      const int s = p_st[j];
      const bool in_fragments = std::binary_search(fragments.begin(), fragments.end(), s);
      if (!in_fragments) continue;
      if (params.flag_mode == FlagMode::all || s != retained)
        ev.pixels.push_back(static_cast<int>(j));
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<ChangeEvent> detect_merges(const std::vector<int>& p_st,
                                       const std::vector<int>& p_sar,
                                       const ChangeParams& params,
                                       const std::vector<int>* p_opt) {
  validate_params(params);
  const ContingencyTable t = contingency(p_st, p_sar);
  std::vector<ChangeEvent> events;

  for (int j = 0; j < t.cols; ++j) {
    if (t.col_sums[static_cast<std::size_t>(j)] == 0) continue;
    std::vector<int> contributors;
    for (int s = 0; s < t.rows; ++s) {
      if (t.row_sums[static_cast<std::size_t>(s)] == 0) continue;
      const double frac = static_cast<double>(t.at(s, j)) /
                          static_cast<double>(t.row_sums[static_cast<std::size_t>(s)]);
      if (frac >= 1.0 - params.tau_merge) contributors.push_back(s);
    }
    if (contributors.size() < 2) continue;

    if (params.strict_merge && p_opt != nullptr) {
      // Majority optical label per contributor; clusters that are all
      // facets of one optical cluster do not constitute a merge.
      std::vector<int> majorities;
      for (int s : contributors) {
        std::map<int, long long> votes;
        for (std::size_t px = 0; px < p_st.size(); ++px)
          if (p_st[px] == s && p_sar[px] == j) ++votes[(*p_opt)[px]];
        int best = -1;
        long long best_n = -1;
        for (const auto& [lab, cnt] : votes)
          if (cnt > best_n) {
            best_n = cnt;
            best = lab;
          }
        majorities.push_back(best);
      }
      std::sort(majorities.begin(), majorities.end());
      if (std::unique(majorities.begin(), majorities.end()) == majorities.begin() + 1)
        continue;
    }

    int retained = contributors.front();
    for (int s : contributors)
      if (t.at(s, j) > t.at(retained, j)) retained = s;

    ChangeEvent ev;
    ev.kind = ChangeEvent::Kind::merge;
    ev.source = j;
    ev.involved = contributors;
    for (std::size_t px = 0; px < p_st.size(); ++px) {
      if (p_sar[px] != j) continue;
      const int s = p_st[px];
      const bool contributes =
          std::binary_search(contributors.begin(), contributors.end(), s);
      if (!contributes) continue;
      if (params.flag_mode == FlagMode::all || s != retained)
        ev.pixels.push_back(static_cast<int>(px));
    }
    events.push_back(std::move(ev));
  }
  return events;
}

Mask change_map(const std::vector<ChangeEvent>& events, int width, int height,
                const ChangeParams& params) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("change_map: non-positive shape");
  Mask m;
  m.width = width;
  m.height = height;
  m.values.assign(static_cast<std::size_t>(width) * height, 0);
  for (const auto& ev : events)
    for (int px : ev.pixels) {
      if (px < 0 || px >= width * height)
        throw std::invalid_argument("change_map: pixel index out of range");
      m.values[static_cast<std::size_t>(px)] = 1;
    }

  if (!params.smooth) return m;

  Mask out = m;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      int ones = 0, total = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          ++total;
          ones += m.at(nx, ny) ? 1 : 0;
        }
      if (2 * ones > total)
        out.set(x, y, true);
      else if (2 * ones < total)
        out.set(x, y, false);
      // exact tie keeps the original value
    }
  return out;
}

}  // namespace hcd
