#include "emoface/animgen/speech_features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "emoface/common/error.hpp"
#include "emoface/common/text.hpp"

namespace emoface::animgen {

using nn::Index;
using nn::Matrix;

namespace {

constexpr char kMagic[8] = {'E', 'M', 'S', 'P', 'E', 'E', 'C', 'H'};

void validate(const SpeechFeatureSequence& s) {
  if (s.features.rows() < 1 || s.features.cols() < 1)
    throw IoError("speech features must have at least one frame and one channel");
  if (!(s.fps > 0) || !std::isfinite(s.fps)) throw IoError("speech features need a positive fps");
  nn::require_finite(s.features, "speech features");
}

template <typename T>
T read_le(const std::string& bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw IoError("speech feature file is truncated");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

template <typename T>
void write_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

Matrix moving_average(const Matrix& x, Index width) {
  Matrix out(x.rows(), x.cols());
  const Index half = width / 2;
  for (Index t = 0; t < x.rows(); ++t) {
    const Index lo = std::max<Index>(0, t - half);
    const Index hi = std::min<Index>(x.rows() - 1, t + half);
    out.row(t) = x.middleRows(lo, hi - lo + 1).colwise().mean();
  }
  return out;
}

}  // namespace

SpeechFeatureSequence resample(const SpeechFeatureSequence& s, double target_fps) {
  if (!(target_fps > 0)) throw InvalidArgument("target fps must be positive");
  if (target_fps == s.fps) return s;
  const Index src = s.features.rows();
  const Index out_rows = std::max<Index>(
      1, static_cast<Index>(std::llround(static_cast<double>(src) * target_fps / s.fps)));
  SpeechFeatureSequence out{Matrix(out_rows, s.features.cols()), target_fps};
  const double step = s.fps / target_fps;
  for (Index k = 0; k < out_rows; ++k) {
    const double pos = std::min(static_cast<double>(k) * step, static_cast<double>(src - 1));
    const auto lo = static_cast<Index>(std::floor(pos));
    const Index hi = std::min(lo + 1, src - 1);
    const double frac = pos - static_cast<double>(lo);
    out.features.row(k) = (1.0 - frac) * s.features.row(lo) + frac * s.features.row(hi);
  }
  return out;
}

std::string speech_features_csv(const SpeechFeatureSequence& s) {
  std::ostringstream os;
  os.precision(17);
  os << "# T=" << s.features.rows() << " F=" << s.features.cols() << " fps=" << s.fps << '\n';
  for (Index t = 0; t < s.features.rows(); ++t) {
    for (Index f = 0; f < s.features.cols(); ++f) os << (f ? "," : "") << s.features(t, f);
    os << '\n';
  }
  return os.str();
}

SpeechFeatureSequence parse_speech_features_csv(std::string_view text) {
  const auto lines = split(text, '\n');
  std::size_t n = 0;
  while (n < lines.size() && trim(lines[n]).empty()) ++n;
  if (n == lines.size() || trim(lines[n]).rfind('#', 0) != 0)
    throw IoError("speech feature CSV is missing its '# T=.. F=.. fps=..' header");
  long long rows = -1, cols = -1;
  double fps = -1;
  for (const auto& tok : split_whitespace(trim(lines[n]).substr(1))) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    try {
      if (key == "T") rows = std::stoll(val);
      else if (key == "F") cols = std::stoll(val);
      else if (key == "fps") fps = std::stod(val);
    } catch (const std::exception&) {
      throw IoError("speech feature header has an unreadable value for " + key);
    }
  }
  if (rows < 1 || cols < 1 || !(fps > 0))
    throw IoError("speech feature header must declare positive T, F and fps");
  SpeechFeatureSequence s{Matrix(rows, cols), fps};
  Index t = 0;
  for (++n; n < lines.size(); ++n) {
    const auto line = trim(lines[n]);
    if (line.empty()) continue;
    if (t == rows) throw IoError("speech feature file has more rows than T=" + std::to_string(rows));
    const auto cells = split(line, ',');
    if (static_cast<long long>(cells.size()) != cols)
      throw DimensionError("speech feature line " + std::to_string(n + 1) + " has " +
                           std::to_string(cells.size()) + " values, header says F=" +
                           std::to_string(cols));
    for (Index f = 0; f < cols; ++f) {
      try {
        s.features(t, f) = std::stod(cells[static_cast<std::size_t>(f)]);
      } catch (const std::exception&) {
        throw IoError("speech feature line " + std::to_string(n + 1) + ": bad number");
      }
    }
    ++t;
  }
  if (t != rows)
    throw IoError("speech feature file has " + std::to_string(t) + " rows, header says T=" +
                  std::to_string(rows));
  validate(s);
  return s;
}

SpeechFeatureSequence load_speech_features(const std::filesystem::path& path, Index expected_width,
                                           double target_fps) {
  const std::string bytes = read_file(path);
  SpeechFeatureSequence s;
  if (bytes.size() >= sizeof kMagic && std::memcmp(bytes.data(), kMagic, sizeof kMagic) == 0) {
    std::size_t pos = sizeof kMagic;
    const auto rows = read_le<std::uint64_t>(bytes, pos);
    const auto cols = read_le<std::uint64_t>(bytes, pos);
    s.fps = read_le<double>(bytes, pos);
    if (rows == 0 || cols == 0 || rows > (1u << 30) || cols > (1u << 30) ||
        rows * cols != (bytes.size() - pos) / sizeof(double) ||
        (bytes.size() - pos) % sizeof(double) != 0)
      throw IoError("speech feature file header does not match its size");
    s.features.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < s.features.size(); ++i) s.features.data()[i] = read_le<double>(bytes, pos);
    validate(s);
  } else if (path.extension() == ".bin") {
    throw IoError("speech feature file lacks the EMSPEECH header");
  } else {
    s = parse_speech_features_csv(bytes);
  }
  if (expected_width > 0 && s.width() != expected_width)
    throw DimensionError("speech features have width " + std::to_string(s.width()) +
                         ", the model expects " + std::to_string(expected_width));
  if (target_fps > 0) s = resample(s, target_fps);
  return s;
}

void save_speech_features(const std::filesystem::path& path, const SpeechFeatureSequence& s) {
  if (path.extension() != ".bin") {
    write_file(path, speech_features_csv(s));
    return;
  }
  std::string out(kMagic, sizeof kMagic);
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(s.features.rows()));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(s.features.cols()));
  write_le<double>(out, s.fps);
  for (Index i = 0; i < s.features.size(); ++i) write_le<double>(out, s.features.data()[i]);
  write_file(path, out);
}

SyntheticSpeech synthesize_speech(std::size_t frames, Index width, double fps, Rng& rng,
                                  Index phonemes) {
  if (frames == 0 || phonemes < 2 || width < phonemes)
    throw InvalidArgument("synthetic speech needs frames > 0 and width >= phonemes >= 2");
  const auto rows = static_cast<Index>(frames);
  Matrix onehot = Matrix::Zero(rows, phonemes);
  for (Index t = 0; t < rows;) {
    const Index len = 2 + static_cast<Index>(rng.index(5));
    const auto p = static_cast<Index>(rng.index(static_cast<std::size_t>(phonemes)));
    for (Index k = t; k < std::min(rows, t + len); ++k) onehot(k, p) = 1.0;
    t += len;
  }
  SyntheticSpeech out;
  out.envelopes = moving_average(onehot, 3);
  Matrix noise(rows, width);
  for (Index i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();
  noise = moving_average(noise, 5);
  out.speech.fps = fps;
  out.speech.features = 0.5 * noise;
  out.speech.features.leftCols(phonemes) = out.envelopes + 0.05 * noise.leftCols(phonemes);
  return out;
}

}  // namespace emoface::animgen
