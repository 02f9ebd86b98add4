#pragma once

#include <string>

namespace remtime {

/// True if the buffer starts with the gzip magic bytes.
bool is_gzip(const std::string& bytes);

/// Inflates a gzip-compressed buffer. Throws std::runtime_error on corrupt
/// input.
std::string gunzip(const std::string& bytes);

/// Deflates a buffer to gzip format (used by tests and log export).
std::string gzip_compress(const std::string& bytes);

}  // namespace remtime
