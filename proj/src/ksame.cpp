#include "fdeid/ksame.hpp"

#include <algorithm>
#include <fstream>

#include "fdeid/rng.hpp"

namespace fdeid {

Gallery Gallery::from_images(std::vector<Image> faces, std::vector<std::string> labels) {
  if (faces.empty()) raise(ErrorCode::InvalidSize, "gallery must be non-empty");
  for (const auto& f : faces)
    if (!f.same_shape(faces.front()))
      raise(ErrorCode::DimensionMismatch, "gallery faces must share dimensions and channels");
  Gallery g;
  g.faces_ = std::move(faces);
  if (labels.empty()) labels.resize(g.faces_.size());
  if (labels.size() != g.faces_.size())
    raise(ErrorCode::InvalidSize, "label count does not match face count");
  g.labels_ = std::move(labels);
  return g;
}

Gallery Gallery::load(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) raise(ErrorCode::MissingFile, "gallery manifest not found: " + manifest.string());
  const auto base = manifest.parent_path();
  std::vector<Image> faces;
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string path = line, label;
    if (const auto tab = line.find('\t'); tab != std::string::npos) {
      path = line.substr(0, tab);
      label = line.substr(tab + 1);
    }
    std::filesystem::path p(path);
    if (p.is_relative()) p = base / p;
    faces.push_back(load_image(p));
    labels.push_back(label);
  }
  Gallery g = from_images(std::move(faces), std::move(labels));
  g.source_manifest_ = manifest.string();
  return g;
}

namespace {

double pixel_distance_sq(const Image& a, const Image& b) {
  const auto sa = a.samples();
  const auto sb = b.samples();
  double acc = 0.0;
  for (size_t i = 0; i < sa.size(); ++i) {
    const double d = static_cast<double>(sa[i]) - sb[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

std::vector<int> knn_pixel(const Image& face, const Gallery& g, int k, bool exclude_self) {
  if (!face.same_shape(g.face(0)))
    raise(ErrorCode::DimensionMismatch, "probe dimensions do not match gallery");
  if (k < 1) raise(ErrorCode::InvalidArgument, "k must be >= 1");

  std::vector<std::pair<double, int>> dists;
  dists.reserve(static_cast<size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) {
    const double d = pixel_distance_sq(face, g.face(i));
    if (exclude_self && d == 0.0) continue;
    dists.emplace_back(d, i);
  }
  if (static_cast<size_t>(k) > dists.size())
    raise(ErrorCode::KTooLarge, "k exceeds usable gallery size");
  std::sort(dists.begin(), dists.end());  // (distance, index): ties go to lower index
  std::vector<int> out(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<size_t>(i)] = dists[static_cast<size_t>(i)].second;
  return out;
}

Image k_same_average(const Image& face, const Gallery& g, const KSameParams& p) {
  const auto nn = knn_pixel(face, g, p.k, p.exclude_self);
  std::vector<double> acc(face.sample_count(), 0.0);
  for (const int idx : nn) {
    const auto s = g.face(idx).samples();
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += s[i];
  }
  Image out(face.width(), face.height(), face.channels());
  const double inv_k = 1.0 / static_cast<double>(nn.size());
  for (size_t i = 0; i < acc.size(); ++i) out.set_raw(i, static_cast<float>(acc[i] * inv_k));
  return out;
}

Image k_same_select(const Image& face, const Gallery& g, const KSameParams& p) {
  const auto nn = knn_pixel(face, g, p.k, p.exclude_self);
  int pick = 0;
  switch (p.selection_mode) {
    case SelectionMode::Closest:
      pick = 0;
      break;
    case SelectionMode::Furthest:
      pick = static_cast<int>(nn.size()) - 1;
      break;
    case SelectionMode::Random: {
      Rng rng(p.rng_seed);
      pick = rng.uniform_int(0, static_cast<int>(nn.size()) - 1);
      break;
    }
  }
  return g.face(nn[static_cast<size_t>(pick)]);
}

Image k_same_furthest(const Image& face, const Gallery& g, const KSameParams& p) {
  KSameParams q = p;
  q.selection_mode = SelectionMode::Furthest;
  return k_same_select(face, g, q);
}

}  // namespace fdeid
