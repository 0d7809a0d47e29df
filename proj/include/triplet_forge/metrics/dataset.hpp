#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/rng.hpp"
#include "triplet_forge/core/tensor.hpp"

namespace tforge {

struct NamedMask {
  std::string clip_id;
  BinaryMask mask;
};

struct MaskStat {
  std::string clip_id;
  double mean = 0.0;
};

inline std::vector<MaskStat> mask_mean_stats(const std::vector<NamedMask>& masks) {
  if (masks.empty()) throw EmptyInputError("no masks given");
  std::vector<MaskStat> out;
  for (const auto& m : masks) out.push_back({m.clip_id, mask_mean(m.mask)});
  return out;
}

struct ClipStat {
  std::string clip_id;
  std::string group_id;
  double mean = 0.0;

  bool operator==(const ClipStat&) const = default;
};

/// Median; the mean of the middle two for even counts.
inline double median(std::vector<double> v) {
  if (v.empty()) throw EmptyInputError("median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Per group (in group_id order) the k clips nearest the group median,
/// ties broken by clip_id.
inline std::vector<std::string> select_eval_set(const std::vector<ClipStat>& stats, std::size_t k_per_group) {
  std::map<std::string, std::vector<ClipStat>> groups;
  std::set<std::string> ids;
  for (const auto& s : stats) {
    if (!ids.insert(s.clip_id).second) throw InputError("duplicate clip_id '" + s.clip_id + "'");
    groups[s.group_id].push_back(s);
  }
  std::vector<std::string> out;
  for (auto& [gid, members] : groups) {
    if (members.size() < k_per_group) {
      throw SizeError("group '" + gid + "' has " + std::to_string(members.size()) + " clips, fewer than k=" +
                      std::to_string(k_per_group));
    }
    std::vector<double> means;
    for (const auto& m : members) means.push_back(m.mean);
    const double med = median(means);
    std::sort(members.begin(), members.end(), [med](const ClipStat& a, const ClipStat& b) {
      const double da = std::abs(a.mean - med), db = std::abs(b.mean - med);
      return da != db ? da < db : a.clip_id < b.clip_id;
    });
    for (std::size_t i = 0; i < k_per_group; ++i) out.push_back(members[i].clip_id);
  }
  return out;
}

enum class Origin { real, synthetic };

inline std::string to_string(Origin o) { return o == Origin::real ? "real" : "synthetic"; }

inline Origin parse_origin(const std::string& s) {
  if (s == "real") return Origin::real;
  if (s == "synthetic") return Origin::synthetic;
  throw FormatError("unknown origin '" + s + "'");
}

struct ManifestEntry {
  std::string clip_id;
  Origin origin = Origin::real;
  std::string path;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  double ratio_synthetic = 0.0;

  std::size_t count(Origin o) const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                  [o](const ManifestEntry& e) { return e.origin == o; }));
  }
};

/// Draws round(ratio*N) synthetic and N - round(ratio*N) real entries without
/// replacement, then shuffles the union. Both draws and the shuffle come from
/// `rng`.
inline DatasetManifest mix_manifest(const std::vector<ManifestEntry>& real,
                                    const std::vector<ManifestEntry>& synthetic, double ratio,
                                    std::size_t total, SeededRng& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("synthetic ratio must be in [0,1]");
  const auto n_syn = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(total)));
  const std::size_t n_real = total - n_syn;
  if (n_syn > synthetic.size()) {
    throw SizeError("synthetic pool has " + std::to_string(synthetic.size()) + " entries, need " +
                    std::to_string(n_syn));
  }
  if (n_real > real.size()) {
    throw SizeError("real pool has " + std::to_string(real.size()) + " entries, need " + std::to_string(n_real));
  }
  const auto draw = [&rng](std::vector<ManifestEntry> pool, std::size_t n, Origin origin) {
    rng.shuffle(pool);
    pool.resize(n);
    for (auto& e : pool) e.origin = origin;
    return pool;
  };
  DatasetManifest m{draw(synthetic, n_syn, Origin::synthetic), ratio};
  const auto r = draw(real, n_real, Origin::real);
  m.entries.insert(m.entries.end(), r.begin(), r.end());
  std::set<std::string> ids;
  for (const auto& e : m.entries) {
    if (!ids.insert(e.clip_id).second) throw InputError("duplicate clip_id '" + e.clip_id + "' in manifest");
  }
  rng.shuffle(m.entries);
  return m;
}

namespace detail {

template <class Fn>
void for_each_record(const std::filesystem::path& path, const char* what, Fn&& fn) {
  std::ifstream is(path);
  if (!is) throw InputError(std::string("cannot open ") + what + " file " + path.string());
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    try {
      fn(ls);
    } catch (const Error& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace detail

/// Lines `clip_id origin path`.
inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::vector<ManifestEntry> out;
  detail::for_each_record(path, "manifest", [&](std::istringstream& ls) {
    std::string id, origin, p, rest;
    if (!(ls >> id >> origin >> p) || (ls >> rest)) throw FormatError("expected 'clip_id origin path'");
    out.push_back({id, parse_origin(origin), p});
  });
  return out;
}

inline void write_manifest(const std::vector<ManifestEntry>& entries, std::ostream& os) {
  for (const auto& e : entries) os << e.clip_id << ' ' << to_string(e.origin) << ' ' << e.path << '\n';
}

/// Lines `clip_id group mean`.
inline std::vector<ClipStat> read_stats(const std::filesystem::path& path) {
  std::vector<ClipStat> out;
  detail::for_each_record(path, "stats", [&](std::istringstream& ls) {
    ClipStat s;
    std::string rest;
    if (!(ls >> s.clip_id >> s.group_id >> s.mean) || (ls >> rest)) throw FormatError("expected 'clip_id group mean'");
    if (!(s.mean >= 0.0 && s.mean <= 1.0)) throw FormatError("mask mean outside [0,1]");
    out.push_back(s);
  });
  return out;
}

inline void write_stats(const std::vector<ClipStat>& stats, std::ostream& os) {
  os << std::setprecision(17);
  for (const auto& s : stats) os << s.clip_id << ' ' << s.group_id << ' ' << s.mean << '\n';
}

}  // namespace tforge
