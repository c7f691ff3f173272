#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "fdeid/adversarial.hpp"
#include "fdeid/image.hpp"
#include "fdeid/ksame.hpp"
#include "fdeid/naive.hpp"

#include "json.hpp"

namespace fdeid {

enum class MethodKind {
  Identity,
  Blur,
  Pixelate,
  Mask,
  KSame,
  Pgd,
  MiFgsm,
  TiDim,
  TipIm,
  Chameleon,
};

struct KSameConfig {
  KSameParams params;
  std::string reference_dataset;  // gallery manifest path
};

struct AttackConfig {
  AttackParams params;
  int embedder_dim = 128;
};

/// Tagged configuration naming one de-identifier plus its parameters;
/// only the members matching `kind` are meaningful.
struct MethodConfig {
  MethodKind kind = MethodKind::Identity;
  BlurParams blur;
  PixelateParams pixelate;
  MaskParams mask;
  KSameConfig ksame;
  AttackConfig attack;

  std::string name() const;
  static MethodKind kind_from_name(const std::string& name);  // InvalidArgument on unknown
};

/// Strict parse: unrecognized parameter keys raise UnknownKey with the
/// dotted path (prefixed by `path` for diagnostics). Per-method defaults
/// are applied (e.g. tipim epsilon 16/255, chameleon alpha 0.001).
MethodConfig method_config_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json method_config_to_json(const MethodConfig& cfg);

/// Shared state for instantiating methods: galleries and oracles are
/// loaded once and shared across images/threads.
struct MethodContext {
  uint64_t seed = 0;
  std::filesystem::path base_dir;  // resolves relative reference_dataset paths
  std::shared_ptr<const Gallery> gallery;
  std::shared_ptr<const GradientOracle> oracle;
};

/// A configured de-identifier. apply() is const and thread-safe; the
/// item_seed drives any stochastic choices so runs stay reproducible.
class Deidentifier {
 public:
  virtual ~Deidentifier() = default;
  virtual Image apply(const Image& face, uint64_t item_seed) const = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<Deidentifier> make_deidentifier(const MethodConfig& cfg,
                                                const MethodContext& ctx);

}  // namespace fdeid
