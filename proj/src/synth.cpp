#include "trackgraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

namespace trackgraph {

namespace {

using json = nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error("scenario: " + where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw Error("scenario: unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("scenario: bad value for '" + std::string(key) + "' in " + where);
  }
}

std::pair<double, double> read_pair(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw Error("scenario: '" + std::string(key) + "' in " + where + " must be [a, b]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

struct Archetype {
  std::vector<double> histogram;
  std::vector<std::vector<double>> centers;
  std::vector<double> deep;
};

Archetype make_archetype(const SynthFeatures& f, const std::vector<int>& bin_order,
                         std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0xA7C4u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::normal_distribution<double> normal(0.0, 1.0);

  Archetype a;
  const std::size_t bins = bin_order.size();
  a.histogram.assign(bins, 0.0);
  double total = 0.0;
  for (int i = 0; i < f.bins_per_archetype; ++i) {
    const std::size_t slot =
        (index * static_cast<std::size_t>(f.bins_per_archetype) + static_cast<std::size_t>(i)) %
        bins;
    const double w = weight(rng);
    a.histogram[static_cast<std::size_t>(bin_order[slot])] += w;
    total += w;
  }
  for (double& h : a.histogram) h *= f.hist_mass / total;

  a.centers.assign(static_cast<std::size_t>(f.keypoints),
                   std::vector<double>(static_cast<std::size_t>(f.descriptor_dim)));
  for (auto& c : a.centers)
    for (double& x : c) x = normal(rng);
  a.deep.resize(static_cast<std::size_t>(f.deep_dim));
  for (double& x : a.deep) x = normal(rng);
  return a;
}

FeatureBundle observe(const Archetype& a, double noise, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureBundle b;
  b.histogram = a.histogram;
  for (double& h : *b.histogram) {
    if (h > 0.0) h *= std::max(0.05, 1.0 + noise * normal(rng));
  }
  b.descriptors.emplace();
  for (const auto& c : a.centers) {
    auto d = c;
    for (double& x : d) x += noise * normal(rng);
    b.descriptors->push_back(std::move(d));
  }
  b.deep_vector = a.deep;
  for (double& x : *b.deep_vector) x += noise * normal(rng);
  return b;
}

// Box clipped to the frame, with its visible fraction of the full area.
std::pair<BoundingBox, double> clip(const BoundingBox& b, double width, double height) {
  const double x0 = std::max(0.0, b.x);
  const double y0 = std::max(0.0, b.y);
  const double x1 = std::min(width, b.right());
  const double y1 = std::min(height, b.bottom());
  if (x1 <= x0 || y1 <= y0) return {b, 0.0};
  BoundingBox c{x0, y0, x1 - x0, y1 - y0};
  return {c, c.area() / b.area()};
}

}  // namespace

SynthScenario parse_scenario(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(std::string("scenario: malformed JSON: ") + e.what());
  }
  check_keys(j, {"name", "frames", "frame_width", "frame_height", "min_visible_fraction", "noise",
                 "features", "objects"},
             "scenario");
  SynthScenario s;
  read(j, "name", s.name, "scenario");
  read(j, "frames", s.frames, "scenario");
  read(j, "frame_width", s.frame_width, "scenario");
  read(j, "frame_height", s.frame_height, "scenario");
  read(j, "min_visible_fraction", s.min_visible_fraction, "scenario");
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    check_keys(n, {"jitter_sigma", "spurious_rate"}, "noise");
    read(n, "jitter_sigma", s.jitter_sigma, "noise");
    read(n, "spurious_rate", s.spurious_rate, "noise");
  }
  if (j.contains("features")) {
    const auto& f = j["features"];
    check_keys(f, {"hist_bins_per_channel", "bins_per_archetype", "hist_mass", "keypoints",
                   "descriptor_dim", "deep_dim", "noise"},
               "features");
    read(f, "hist_bins_per_channel", s.features.hist_bins_per_channel, "features");
    read(f, "bins_per_archetype", s.features.bins_per_archetype, "features");
    read(f, "hist_mass", s.features.hist_mass, "features");
    read(f, "keypoints", s.features.keypoints, "features");
    read(f, "descriptor_dim", s.features.descriptor_dim, "features");
    read(f, "deep_dim", s.features.deep_dim, "features");
    read(f, "noise", s.features.noise, "features");
  }
  if (j.contains("objects")) {
    if (!j["objects"].is_array()) throw Error("scenario: 'objects' must be an array");
    for (std::size_t i = 0; i < j["objects"].size(); ++i) {
      const auto& o = j["objects"][i];
      const std::string where = "objects[" + std::to_string(i) + "]";
      check_keys(o, {"start", "velocity", "size", "first_frame", "last_frame", "dropouts",
                     "archetype"},
                 where);
      if (!o.contains("start")) throw Error("scenario: " + where + " needs 'start'");
      SynthObject obj;
      std::tie(obj.start_x, obj.start_y) = read_pair(o, "start", where);
      if (o.contains("velocity")) std::tie(obj.vx, obj.vy) = read_pair(o, "velocity", where);
      if (o.contains("size")) std::tie(obj.width, obj.height) = read_pair(o, "size", where);
      read(o, "first_frame", obj.first_frame, where);
      read(o, "last_frame", obj.last_frame, where);
      read(o, "archetype", obj.archetype, where);
      if (o.contains("dropouts")) {
        if (!o["dropouts"].is_array()) throw Error("scenario: " + where + " dropouts must be a list");
        for (const auto& d : o["dropouts"]) {
          if (!d.is_array() || d.size() != 2 || !d[0].is_number_integer() ||
              !d[1].is_number_integer()) {
            throw Error("scenario: " + where + " dropouts must be [first, last] frame pairs");
          }
          obj.dropouts.emplace_back(d[0].get<int>(), d[1].get<int>());
        }
      }
      s.objects.push_back(std::move(obj));
    }
  }

  if (s.frames < 0) throw Error("scenario: frames must be >= 0");
  if (!(s.frame_width > 0.0) || !(s.frame_height > 0.0)) {
    throw Error("scenario: frame size must be positive");
  }
  if (!(s.min_visible_fraction > 0.0 && s.min_visible_fraction <= 1.0)) {
    throw Error("scenario: min_visible_fraction must lie in (0, 1]");
  }
  if (s.jitter_sigma < 0.0 || s.spurious_rate < 0.0) {
    throw Error("scenario: noise parameters must be >= 0");
  }
  const auto& f = s.features;
  if (f.hist_bins_per_channel < 1 || f.bins_per_archetype < 1 || f.keypoints < 0 ||
      f.descriptor_dim < 1 || f.deep_dim < 1 || !(f.hist_mass > 0.0) || f.noise < 0.0) {
    throw Error("scenario: invalid feature parameters");
  }
  for (const auto& o : s.objects) {
    if (!(o.width > 0.0) || !(o.height > 0.0)) throw Error("scenario: object size must be positive");
    if (o.first_frame < 1) throw Error("scenario: object first_frame must be >= 1");
  }
  return s;
}

SynthScenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file '" + path + "'");
  return parse_scenario(in);
}

SequenceBundle synth_generate(const SynthScenario& sc, std::uint64_t seed) {
  SequenceBundle seq;
  seq.name = sc.name;
  seq.frame_count = sc.frames;
  seq.frame_width = sc.frame_width;
  seq.frame_height = sc.frame_height;
  seq.detections.resize(static_cast<std::size_t>(sc.frames));
  seq.features.resize(static_cast<std::size_t>(sc.frames));
  seq.gt.emplace();

  const int channels = sc.features.hist_bins_per_channel;
  std::vector<int> bin_order(static_cast<std::size_t>(channels * channels * channels));
  std::iota(bin_order.begin(), bin_order.end(), 0);
  {
    std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0xB145u};
    std::mt19937_64 shuffle_rng(s);
    std::shuffle(bin_order.begin(), bin_order.end(), shuffle_rng);
  }

  std::vector<Archetype> archetypes;
  for (std::size_t i = 0; i < sc.objects.size(); ++i) {
    const int a = sc.objects[i].archetype;
    archetypes.push_back(make_archetype(sc.features, bin_order, seed,
                                        a < 0 ? i : static_cast<std::uint64_t>(a)));
  }

  std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                  0x5EEDu};
  std::mt19937_64 rng(s);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::poisson_distribution<int> spurious(sc.spurious_rate > 0.0 ? sc.spurious_rate : 1.0);
  std::vector<char> seen(sc.objects.size(), 0), gone(sc.objects.size(), 0);
  std::uint64_t spurious_count = 0;

  for (int f = 1; f <= sc.frames; ++f) {
    auto& dets = seq.detections[static_cast<std::size_t>(f - 1)];
    auto& feats = seq.features[static_cast<std::size_t>(f - 1)];
    for (std::size_t i = 0; i < sc.objects.size(); ++i) {
      const auto& o = sc.objects[i];
      if (gone[i] || f < o.first_frame || (o.last_frame > 0 && f > o.last_frame)) continue;
      const double t = f - o.first_frame;
      const BoundingBox full{o.start_x + o.vx * t - o.width / 2.0,
                             o.start_y + o.vy * t - o.height / 2.0, o.width, o.height};
      const auto [box, visible] = clip(full, sc.frame_width, sc.frame_height);
      if (visible < sc.min_visible_fraction) {
        if (seen[i]) gone[i] = 1;
        continue;
      }
      seen[i] = 1;
      seq.gt->push_back({f, static_cast<int>(i) + 1, box});

      const bool dropped = std::any_of(o.dropouts.begin(), o.dropouts.end(),
                                       [f](const auto& d) { return f >= d.first && f <= d.second; });
      if (dropped) continue;
      BoundingBox det = box;
      if (sc.jitter_sigma > 0.0) {
        det.x += sc.jitter_sigma * jitter(rng);
        det.y += sc.jitter_sigma * jitter(rng);
        det.w = std::max(1.0, det.w + sc.jitter_sigma * jitter(rng));
        det.h = std::max(1.0, det.h + sc.jitter_sigma * jitter(rng));
      }
      dets.push_back({f, static_cast<int>(dets.size()), det, 0.9});
      feats.push_back(observe(archetypes[i], sc.features.noise, rng));
    }
    if (sc.spurious_rate > 0.0) {
      const int extra = spurious(rng);
      for (int k = 0; k < extra; ++k) {
        const double w = 40.0 + 60.0 * unit(rng);
        const double h = 30.0 + 40.0 * unit(rng);
        const BoundingBox box{unit(rng) * (sc.frame_width - w), unit(rng) * (sc.frame_height - h), w,
                              h};
        const auto a = make_archetype(sc.features, bin_order, seed,
                                      sc.objects.size() + 1000 + spurious_count++);
        dets.push_back({f, static_cast<int>(dets.size()), box, 0.4});
        feats.push_back(observe(a, sc.features.noise, rng));
      }
    }
  }
  return seq;
}

}  // namespace trackgraph
