#include "dex/io/pgm.hpp"

#include <cctype>
#include <fstream>

#include "dex/math/error.hpp"

namespace dex::io {

namespace {

int header_number(std::istream& in, const std::string& source) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  if (!(in >> value) || value < 0) {
    throw ParseError(source + ": malformed PGM header");
  }
  return value;
}

}  // namespace

tracking::IrFrame read_pgm(std::istream& in, const std::string& source) {
  char magic[2] = {};
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5') {
    throw ParseError(source + ": not a binary PGM (P5)");
  }
  tracking::IrFrame frame;
  frame.width = header_number(in, source);
  frame.height = header_number(in, source);
  const int maxval = header_number(in, source);
  if (frame.width <= 0 || frame.height <= 0 || maxval != 255) {
    throw ParseError(source + ": only 8-bit PGM with positive dimensions is supported");
  }
  if (!std::isspace(in.get())) {
    throw ParseError(source + ": malformed PGM header");
  }
  frame.pixels.resize(static_cast<std::size_t>(frame.width) * frame.height);
  if (!in.read(reinterpret_cast<char*>(frame.pixels.data()),
               static_cast<std::streamsize>(frame.pixels.size()))) {
    throw ParseError(source + ": PGM pixel data is truncated");
  }
  return frame;
}

tracking::IrFrame load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  return read_pgm(in, path);
}

void write_pgm(std::ostream& out, const tracking::IrFrame& frame) {
  if (frame.width <= 0 || frame.height <= 0 ||
      frame.pixels.size() != static_cast<std::size_t>(frame.width) * frame.height) {
    throw DomainError("frame dimensions do not match its pixel buffer");
  }
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
}

void save_pgm(const std::string& path, const tracking::IrFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path);
  }
  write_pgm(out, frame);
}

}  // namespace dex::io
