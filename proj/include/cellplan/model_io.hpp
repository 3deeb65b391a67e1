#pragma once

// Self-describing JSON model documents:
//   {"format": "cellplan-model", "format_version": 1, "model_type": ...,
//    "feature_dim": ..., ...}
// Doubles are written in shortest round-trip form, so save -> load
// reproduces decision values bit for bit.

#include <iosfwd>
#include <string>

#include "cellplan/kmeans.hpp"
#include "cellplan/svc.hpp"
#include "cellplan/svr.hpp"

namespace cellplan {

inline constexpr int kModelFormatVersion = 1;

enum class ModelType { SvmBinary, SvmMulticlass, Kmeans, Svr };
std::string to_string(ModelType t);

struct ModelHeader {
  ModelType type;
  std::size_t feature_dim = 0;
  int format_version = 0;
};

void save_model(std::ostream& out, const BinaryModel& m);
void save_model(std::ostream& out, const MulticlassModel& m);
void save_model(std::ostream& out, const KmeansRef& m);
void save_model(std::ostream& out, const SvrModel& m);

/// Reads only the header fields; the stream is consumed.
ModelHeader peek_model(std::istream& in);

BinaryModel load_binary_model(std::istream& in);
MulticlassModel load_multiclass_model(std::istream& in);
KmeansRef load_kmeans_model(std::istream& in);
SvrModel load_svr_model(std::istream& in);

}  // namespace cellplan
