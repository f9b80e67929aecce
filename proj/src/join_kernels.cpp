#include "phd/join_kernels.hpp"

#include <unordered_map>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace phd::kernels {

namespace {

struct KeyColumns {
  std::vector<int> left;
  std::vector<int> right;
  std::vector<int> right_extra;  // right columns not shared with left
};

KeyColumns key_columns(const BindingTable& left, const BindingTable& right) {
  KeyColumns k;
  for (std::size_t j = 0; j < right.arity(); ++j) {
    const int i = left.column(right.header()[j]);
    if (i >= 0) {
      k.left.push_back(i);
      k.right.push_back(static_cast<int>(j));
    } else {
      k.right_extra.push_back(static_cast<int>(j));
    }
  }
  return k;
}

std::uint64_t hash_key(std::span<const TermId> row, const std::vector<int>& cols) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int c : cols) {
    h ^= row[c];
    h *= 0x100000001b3ULL;
    h ^= h >> 31;
  }
  return h;
}

bool keys_equal(std::span<const TermId> a, const std::vector<int>& ca, std::span<const TermId> b,
                const std::vector<int>& cb) {
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (a[ca[i]] != b[cb[i]]) return false;
  }
  return true;
}

using BuildTable = std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>;

BuildTable build(const BindingTable& t, const std::vector<int>& cols) {
  BuildTable table;
  table.reserve(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) table[hash_key(t.row(r), cols)].push_back(static_cast<std::uint32_t>(r));
  return table;
}

// Probes left rows [begin, end) and appends joined rows to `out`.
void probe_range(const BindingTable& left, const BindingTable& right, const KeyColumns& k, const BuildTable& ht,
                 std::size_t begin, std::size_t end, std::vector<TermId>& out) {
  for (std::size_t r = begin; r < end; ++r) {
    const auto lrow = left.row(r);
    auto it = ht.find(hash_key(lrow, k.left));
    if (it == ht.end()) continue;
    for (auto rr : it->second) {
      const auto rrow = right.row(rr);
      if (!keys_equal(lrow, k.left, rrow, k.right)) continue;
      out.insert(out.end(), lrow.begin(), lrow.end());
      for (int c : k.right_extra) out.push_back(rrow[c]);
    }
  }
}

template <typename RangeFn>
std::vector<TermId> run_chunks(std::size_t n, Exec exec, RangeFn&& fn) {
  std::vector<TermId> out;
#ifdef _OPENMP
  if (exec == Exec::Parallel && n >= kParallelProbeThreshold) {
    const int threads = omp_get_max_threads();
    std::vector<std::vector<TermId>> parts(static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
    {
      const auto t = static_cast<std::size_t>(omp_get_thread_num());
      const auto nt = static_cast<std::size_t>(omp_get_num_threads());
      // Contiguous static chunks keep the concatenated output in serial order.
      const std::size_t begin = n * t / nt;
      const std::size_t end = n * (t + 1) / nt;
      fn(begin, end, parts[t]);
    }
    std::size_t total = 0;
    for (auto& p : parts) total += p.size();
    out.reserve(total);
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  }
#else
  (void)exec;
#endif
  fn(std::size_t{0}, n, out);
  return out;
}

}  // namespace

BindingTable hash_join(const BindingTable& left, const BindingTable& right, Exec exec) {
  const auto k = key_columns(left, right);
  std::vector<std::string> header = left.header();
  for (int c : k.right_extra) header.push_back(right.header()[c]);
  BindingTable result(header);
  if (left.empty() || right.empty()) return result;

  const auto ht = build(right, k.right);
  const auto cells = run_chunks(left.size(), exec, [&](std::size_t b, std::size_t e, std::vector<TermId>& out) {
    probe_range(left, right, k, ht, b, e, out);
  });
  const std::size_t arity = header.size();
  if (arity == 0) {
    // Two boolean tables: one empty row if both are true.
    std::vector<TermId> none;
    result.add_row(none);
    return result;
  }
  result.reserve(cells.size() / arity);
  for (std::size_t i = 0; i < cells.size(); i += arity) result.add_row({cells.data() + i, arity});
  return result;
}

BindingTable semi_join(const BindingTable& table, const BindingTable& keys, Exec exec) {
  const auto k = key_columns(table, keys);
  BindingTable result(table.header());
  if (table.empty() || keys.empty()) return result;
  const auto ht = build(keys, k.right);
  const std::size_t arity = table.arity();
  const auto cells = run_chunks(table.size(), exec, [&](std::size_t b, std::size_t e, std::vector<TermId>& out) {
    for (std::size_t r = b; r < e; ++r) {
      const auto row = table.row(r);
      auto it = ht.find(hash_key(row, k.left));
      if (it == ht.end()) continue;
      for (auto kr : it->second) {
        if (keys_equal(row, k.left, keys.row(kr), k.right)) {
          out.insert(out.end(), row.begin(), row.end());
          break;
        }
      }
    }
  });
  if (arity == 0) return table;
  for (std::size_t i = 0; i < cells.size(); i += arity) result.add_row({cells.data() + i, arity});
  return result;
}

}  // namespace phd::kernels
