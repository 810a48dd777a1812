#pragma once

#include <string>

#include "sseg/unet.hpp"

namespace sseg {

// Checkpoint file layout: magic "SSEG1", little-endian u64 header length,
// canonical JSON header (format version, net spec, parameter manifest with
// shapes), then raw little-endian f32 payloads in manifest order.
// Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const Network& net);
Network load_checkpoint(const std::string& path);

}  // namespace sseg
