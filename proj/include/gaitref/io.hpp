#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "gaitref/data.hpp"
#include "gaitref/error.hpp"
#include "gaitref/tensor.hpp"

namespace gaitref {

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing", 0);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw FormatError("short write to " + path.string(), 0);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void append_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void append_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void append_f64(std::string& s, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  append_u64(s, bits);
}

struct BinReader {
  const std::string& data;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (pos + n > data.size()) {
      throw FormatError(std::string("truncated file while reading ") + what, pos);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)]))
           << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)]))
           << (8 * i);
    }
    pos += 8;
    return v;
  }
  double f64(const char* what) {
    const std::uint64_t bits = u64(what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = data.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace detail

// ---- silhouette frames: binary PGM (P5), maxval 1 ----

inline std::string encode_pgm(const std::vector<std::uint8_t>& frame, std::int64_t h,
                              std::int64_t w) {
  std::string s = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n1\n";
  s.append(reinterpret_cast<const char*>(frame.data()), frame.size());
  return s;
}

inline std::vector<std::uint8_t> decode_pgm(const std::string& data, std::int64_t expect_h,
                                            std::int64_t expect_w) {
  std::size_t pos = 0;
  auto skip_space = [&]() {
    while (pos < data.size()) {
      if (data[pos] == '#') {  // header comment runs to end of line
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_space();
    const std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos == start) throw FormatError(std::string("expected integer for ") + what, start);
    return std::stoll(data.substr(start, pos - start));
  };
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') {
    throw FormatError("not a binary PGM (missing P5 magic)", 0);
  }
  pos = 2;
  const std::int64_t w = read_int("width");
  const std::int64_t h = read_int("height");
  const std::int64_t maxval = read_int("maxval");
  if (maxval != 1) throw FormatError("silhouette PGM maxval must be 1", pos);
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
    throw FormatError("missing whitespace after maxval", pos);
  }
  ++pos;
  if (w != expect_w || h != expect_h) {
    throw FormatError("unexpected silhouette size " + std::to_string(w) + "x" + std::to_string(h),
                      pos);
  }
  const std::size_t need = static_cast<std::size_t>(w * h);
  if (data.size() - pos < need) throw FormatError("truncated PGM pixel data", data.size());
  if (data.size() - pos > need) throw FormatError("trailing bytes after PGM pixel data", pos + need);
  std::vector<std::uint8_t> frame(need);
  for (std::size_t i = 0; i < need; ++i) {
    const auto v = static_cast<std::uint8_t>(data[pos + i]);
    if (v > 1) throw FormatError("silhouette pixel out of {0,1}", pos + i);
    frame[i] = v;
  }
  return frame;
}

// ---- skeleton sequences: line-delimited text ----
// header: `#skeleton v1 K=<k> format=<coco17|openpose18>`
// frame line: `frame_index k x0 y0 x1 y1 ...`
// additional `#`-prefixed lines after the header are preserved-format comments

inline std::string encode_skeleton(const SkeletonSequence& seq,
                                   const std::vector<std::string>& comments = {}) {
  seq.validate();
  const std::int64_t n = seq.num_frames(), k = seq.num_joints();
  std::string s = "#skeleton v1 K=" + std::to_string(k) + " format=" + seq.format + "\n";
  for (const std::string& c : comments) s += "#" + c + "\n";
  for (std::int64_t f = 0; f < n; ++f) {
    s += std::to_string(f) + " " + std::to_string(k);
    for (std::int64_t j = 0; j < k; ++j) {
      s += " " + detail::format_double(seq.joints.at(f, j, 0));
      s += " " + detail::format_double(seq.joints.at(f, j, 1));
    }
    s += "\n";
  }
  return s;
}

inline SkeletonSequence decode_skeleton(const std::string& data) {
  std::size_t pos = 0;
  auto next_line = [&](std::size_t* line_start) -> std::string {
    *line_start = pos;
    if (pos >= data.size()) return {};
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    std::string line = data.substr(pos, end - pos);
    pos = end + (end < data.size() ? 1 : 0);
    return line;
  };

  std::size_t line_start = 0;
  std::string header = next_line(&line_start);
  long long k_ll = 0;
  char fmt[32] = {0};
  if (std::sscanf(header.c_str(), "#skeleton v1 K=%lld format=%31s", &k_ll, fmt) != 2) {
    throw FormatError("bad skeleton header", line_start);
  }
  const std::int64_t k = k_ll;
  if (std::string(fmt) != "coco17" && std::string(fmt) != "openpose18") {
    throw FormatError("unknown skeleton format in header: " + std::string(fmt), line_start);
  }
  const std::int64_t expect_k = std::string(fmt) == "coco17" ? 17 : 18;
  if (k != expect_k) {
    throw FormatError("joint count " + std::to_string(k) + " disagrees with format " + fmt,
                      line_start);
  }

  std::vector<double> coords;
  std::int64_t frames = 0;
  while (pos < data.size()) {
    std::string line = next_line(&line_start);
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    const char* p = line.c_str();
    char* endp = nullptr;
    const long long frame_idx = std::strtoll(p, &endp, 10);
    if (endp == p) throw FormatError("bad frame index", line_start);
    if (frame_idx != frames) {
      throw FormatError("frame indices must be sequential from 0", line_start);
    }
    p = endp;
    const long long line_k = std::strtoll(p, &endp, 10);
    if (endp == p || line_k != k) {
      throw FormatError("frame joint count disagrees with header", line_start);
    }
    p = endp;
    for (std::int64_t j = 0; j < 2 * k; ++j) {
      const double v = std::strtod(p, &endp);
      if (endp == p) {
        throw FormatError("truncated joint list",
                          line_start + static_cast<std::size_t>(p - line.c_str()));
      }
      coords.push_back(v);
      p = endp;
    }
    while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
    if (*p != '\0') {
      throw FormatError("trailing characters on frame line",
                        line_start + static_cast<std::size_t>(p - line.c_str()));
    }
    ++frames;
  }
  if (frames == 0) throw FormatError("skeleton file has no frames", data.size());
  SkeletonSequence seq;
  seq.format = fmt;
  seq.joints = Tensor({frames, k, 2}, std::move(coords));
  seq.validate();
  return seq;
}

// ---- parameter checkpoints ----
// magic `GRFW1`, u64 tensor count, then per tensor:
// u32 name length, name bytes, u32 rank, u64 dims..., f64 data (little-endian)

inline std::string encode_checkpoint(const std::map<std::string, Tensor>& tensors) {
  std::string s = "GRFW1";
  detail::append_u64(s, tensors.size());
  for (const auto& [name, t] : tensors) {
    detail::append_u32(s, static_cast<std::uint32_t>(name.size()));
    s += name;
    detail::append_u32(s, static_cast<std::uint32_t>(t.rank()));
    for (int d = 0; d < t.rank(); ++d) {
      detail::append_u64(s, static_cast<std::uint64_t>(t.dim(d)));
    }
    for (std::int64_t i = 0; i < t.numel(); ++i) detail::append_f64(s, t.at(i));
  }
  return s;
}

inline std::map<std::string, Tensor> decode_checkpoint(const std::string& data) {
  if (data.size() < 5 || data.compare(0, 5, "GRFW1") != 0) {
    throw FormatError("bad checkpoint magic (want GRFW1)", 0);
  }
  detail::BinReader r{data, 5};
  const std::uint64_t count = r.u64("tensor count");
  std::map<std::string, Tensor> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32("name length");
    if (name_len == 0 || name_len > 4096) throw FormatError("implausible name length", r.pos - 4);
    const std::string name = r.bytes(name_len, "tensor name");
    const std::uint32_t rank = r.u32("rank");
    if (rank == 0 || rank > 8) throw FormatError("implausible tensor rank", r.pos - 4);
    Shape shape;
    std::int64_t numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const auto dim = static_cast<std::int64_t>(r.u64("dimension"));
      if (dim < 1 || dim > (1 << 30)) throw FormatError("implausible dimension", r.pos - 8);
      shape.push_back(dim);
      numel *= dim;
    }
    std::vector<double> values(static_cast<std::size_t>(numel));
    for (std::int64_t v = 0; v < numel; ++v) values[static_cast<std::size_t>(v)] = r.f64("tensor data");
    if (!out.emplace(name, Tensor(std::move(shape), std::move(values))).second) {
      throw FormatError("duplicate tensor name: " + name, r.pos);
    }
  }
  if (r.pos != data.size()) throw FormatError("trailing bytes after checkpoint", r.pos);
  return out;
}

inline void write_checkpoint(const std::filesystem::path& path,
                             const std::map<std::string, Tensor>& tensors) {
  detail::write_file(path, encode_checkpoint(tensors));
}

inline std::map<std::string, Tensor> read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path));
}

// ---- dataset directory layout ----
// <subject>/<sequence>/{sil/*.pgm, skel.txt[, clean_skel.txt]}

struct SequenceEntry {
  std::string subject;
  std::string sequence;
  std::filesystem::path dir;
};

struct DatasetIndex {
  std::vector<SequenceEntry> sequences;                    // lexicographic (subject, sequence)
  std::map<std::string, std::vector<std::size_t>> by_subject;
};

inline DatasetIndex build_dataset_index(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw FormatError("dataset root is not a directory: " + root.string(), 0);
  DatasetIndex index;
  std::vector<fs::path> subjects;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) subjects.push_back(e.path());
  }
  std::sort(subjects.begin(), subjects.end());
  for (const auto& subj : subjects) {
    std::vector<fs::path> seqs;
    for (const auto& e : fs::directory_iterator(subj)) {
      if (e.is_directory()) seqs.push_back(e.path());
    }
    std::sort(seqs.begin(), seqs.end());
    for (const auto& seq : seqs) {
      if (!fs::exists(seq / "skel.txt")) {
        throw FormatError("sequence directory missing skel.txt: " + seq.string(), 0);
      }
      index.by_subject[subj.filename().string()].push_back(index.sequences.size());
      index.sequences.push_back({subj.filename().string(), seq.filename().string(), seq});
    }
  }
  if (index.sequences.empty()) {
    throw FormatError("dataset contains no sequences: " + root.string(), 0);
  }
  return index;
}

inline void write_record(const std::filesystem::path& seq_dir, const SampleRecord& rec) {
  namespace fs = std::filesystem;
  fs::create_directories(seq_dir / "sil");
  rec.silhouette.validate();
  for (std::int64_t f = 0; f < rec.silhouette.num_frames(); ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "%05lld.pgm", static_cast<long long>(f));
    detail::write_file(seq_dir / "sil" / name,
                       encode_pgm(rec.silhouette.frames[static_cast<std::size_t>(f)],
                                  rec.silhouette.height, rec.silhouette.width));
  }
  detail::write_file(seq_dir / "skel.txt", encode_skeleton(rec.skeleton));
  if (rec.clean_skeleton) {
    detail::write_file(seq_dir / "clean_skel.txt", encode_skeleton(*rec.clean_skeleton));
  }
}

inline SampleRecord read_record(const SequenceEntry& entry) {
  namespace fs = std::filesystem;
  SampleRecord rec;
  std::vector<fs::path> frames;
  const fs::path sil_dir = entry.dir / "sil";
  if (!fs::is_directory(sil_dir)) {
    throw FormatError("sequence missing sil/ directory: " + entry.dir.string(), 0);
  }
  for (const auto& e : fs::directory_iterator(sil_dir)) {
    if (e.path().extension() == ".pgm") frames.push_back(e.path());
  }
  std::sort(frames.begin(), frames.end());
  if (frames.empty()) throw FormatError("no silhouette frames in " + sil_dir.string(), 0);
  rec.silhouette.height = kSilhouetteHeight;
  rec.silhouette.width = kSilhouetteWidth;
  for (const auto& p : frames) {
    rec.silhouette.frames.push_back(
        decode_pgm(detail::read_file(p), kSilhouetteHeight, kSilhouetteWidth));
  }
  rec.silhouette.subject_id = entry.subject;
  rec.silhouette.view_tag = entry.sequence;
  rec.skeleton = decode_skeleton(detail::read_file(entry.dir / "skel.txt"));
  rec.skeleton.subject_id = entry.subject;
  if (fs::exists(entry.dir / "clean_skel.txt")) {
    rec.clean_skeleton = decode_skeleton(detail::read_file(entry.dir / "clean_skel.txt"));
    rec.clean_skeleton->subject_id = entry.subject;
  }
  if (rec.skeleton.num_frames() != rec.silhouette.num_frames()) {
    throw FormatError("silhouette/skeleton frame count mismatch in " + entry.dir.string(), 0);
  }
  return rec;
}

}  // namespace gaitref
