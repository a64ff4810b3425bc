#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "clarity/model.hpp"
#include "clarity/tiny_backend.hpp"

namespace clarity {

inline const char* kBackendId = "tiny-seq2seq";

/// Full model state (config, vocabulary, parameters) as one JSON file.
void save_model(const TinySeq2Seq& model, const std::filesystem::path& path);
std::unique_ptr<TinySeq2Seq> load_model(const std::filesystem::path& path);

/// Index of a trained model directory: which file serves which model.
struct Manifest {
  std::string backend = kBackendId;
  std::string tokenizer;
  int hidden_size = 0;
  /// model kind name -> checkpoint path relative to the manifest's directory
  std::map<std::string, std::string> roles;

  std::filesystem::path path_for(ModelKind kind,
                                 const std::filesystem::path& manifest_dir) const;
};

void save_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);

/// Loads the model serving `kind` per the manifest next to `manifest_path`.
std::unique_ptr<TinySeq2Seq> load_role_model(const std::filesystem::path& manifest_path,
                                             ModelKind kind);

}  // namespace clarity
