#include "streamad/frame_dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "streamad/errors.hpp"
#include "streamad/image.hpp"

namespace fs = std::filesystem;

namespace streamad {

namespace {

bool frame_extension(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".pgm" || ext == ".png" || ext == ".bmp";
}

struct LabelRange {
  int first;
  int last;
};

std::map<std::string, std::vector<LabelRange>> parse_label_file(const std::string& path) {
  std::map<std::string, std::vector<LabelRange>> ranges;
  if (path.empty()) return ranges;
  std::ifstream in(path);
  if (!in) throw InputError("cannot open label file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string clip;
    LabelRange r{};
    if (!(is >> clip >> r.first >> r.last) || r.first < 0 || r.last < r.first) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected '<clip> <first> <last>'");
    }
    ranges[clip].push_back(r);
  }
  return ranges;
}

}  // namespace

FrameDataset load_frame_dataset(const std::string& root, const std::string& label_file,
                                const FrameDatasetConfig& cfg) {
  if (!fs::is_directory(root)) throw InputError("dataset root is not a directory: " + root);
  auto ranges = parse_label_file(label_file);

  std::vector<std::string> clip_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) clip_dirs.push_back(entry.path().filename().string());
  }
  std::sort(clip_dirs.begin(), clip_dirs.end());
  if (clip_dirs.empty()) throw InputError("no clip directories under " + root);

  FrameDataset ds;
  ds.height = cfg.height;
  ds.width = cfg.width;
  int clip_id = 0;
  for (const std::string& name : clip_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(fs::path(root) / name)) {
      if (entry.is_regular_file() && frame_extension(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("clip '" + name + "' contains no frames");

    LabeledClip clip;
    clip.clip_id = clip_id++;
    clip.labels.assign(files.size(), 0);
    auto it = ranges.find(name);
    if (it != ranges.end()) {
      for (const LabelRange& r : it->second) {
        if (r.last >= static_cast<int>(files.size())) {
          throw InputError("clip '" + name + "': label range [" + std::to_string(r.first) + "," +
                           std::to_string(r.last) + "] exceeds " + std::to_string(files.size()) +
                           " frames");
        }
        for (int f = r.first; f <= r.last; ++f) clip.labels[static_cast<std::size_t>(f)] = 1;
      }
      ranges.erase(it);
    }
    clip.frames.reserve(files.size());
    for (const fs::path& f : files) {
      clip.frames.push_back(image_to_tensor(decode_image(f.string()), cfg.height, cfg.width));
    }
    ds.clips.push_back(std::move(clip));
    ds.clip_names.push_back(name);
  }
  if (!ranges.empty()) {
    throw InputError("label file names unknown clip '" + ranges.begin()->first + "'");
  }
  return ds;
}

}  // namespace streamad
