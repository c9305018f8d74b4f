#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "dex/tracking/blobs.hpp"

namespace dex::io {

// Binary 8-bit PGM (P5, maxval 255). Header comments are allowed.
tracking::IrFrame read_pgm(std::istream& in, const std::string& source = "pgm");
tracking::IrFrame load_pgm(const std::string& path);
void write_pgm(std::ostream& out, const tracking::IrFrame& frame);
void save_pgm(const std::string& path, const tracking::IrFrame& frame);

}  // namespace dex::io
