#include "hrsal/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <map>

#include "hrsal/image_io.hpp"

namespace hrsal {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool has_extension(const fs::path& p, std::initializer_list<const char*> exts) {
    const std::string ext = lower(p.extension().string());
    return std::any_of(exts.begin(), exts.end(), [&](const char* e) { return ext == e; });
}

// stem -> path for regular files with one of `exts`; earlier extensions win
std::map<std::string, fs::path> index_by_stem(const fs::path& dir, std::initializer_list<const char*> exts,
                                              std::vector<std::string>& skipped) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && has_extension(entry.path(), exts)) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    auto rank = [&](const fs::path& p) {
        const std::string ext = lower(p.extension().string());
        return std::find_if(exts.begin(), exts.end(), [&](const char* e) { return ext == e; }) - exts.begin();
    };
    std::map<std::string, fs::path> out;
    for (const fs::path& p : files) {
        const std::string stem = p.stem().string();
        auto [it, inserted] = out.emplace(stem, p);
        if (inserted) continue;
        fs::path loser = p;
        if (rank(p) < rank(it->second)) std::swap(loser, it->second);
        skipped.push_back(loser.string() + ": duplicate stem");
    }
    return out;
}

void compute_resolution(DatasetManifest& manifest) {
    ResolutionStats stats;
    stats.min_width = stats.min_height = std::numeric_limits<int>::max();
    double sum_w = 0.0;
    double sum_h = 0.0;
    for (const DatasetEntry& e : manifest.entries) {
        const auto size = probe_dimensions(e.image);
        if (!size) continue;
        ++stats.probed;
        stats.min_width = std::min(stats.min_width, size->width);
        stats.min_height = std::min(stats.min_height, size->height);
        stats.max_width = std::max(stats.max_width, size->width);
        stats.max_height = std::max(stats.max_height, size->height);
        sum_w += size->width;
        sum_h += size->height;
    }
    if (stats.probed == 0) {
        stats.min_width = stats.min_height = 0;
    } else {
        stats.mean_width = sum_w / static_cast<double>(stats.probed);
        stats.mean_height = sum_h / static_cast<double>(stats.probed);
    }
    manifest.resolution = stats;
}

DatasetManifest finish(DatasetManifest manifest, const fs::path& source) {
    if (manifest.entries.empty()) throw DatasetError(source.string() + ": dataset contains no image/gt pairs");
    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const DatasetEntry& a, const DatasetEntry& b) { return a.id < b.id; });
    compute_resolution(manifest);
    return manifest;
}

DatasetManifest join(const std::map<std::string, fs::path>& images, const std::map<std::string, fs::path>& truths,
                     DatasetManifest manifest) {
    for (const auto& [stem, image] : images) {
        const auto gt = truths.find(stem);
        if (gt == truths.end()) {
            manifest.skipped.push_back(image.string() + ": no matching ground truth");
            continue;
        }
        manifest.entries.push_back(DatasetEntry{stem, image, gt->second});
    }
    for (const auto& [stem, gt] : truths) {
        if (!images.contains(stem)) manifest.skipped.push_back(gt.string() + ": no matching image");
    }
    return manifest;
}

DatasetManifest load_paired(const fs::path& root) {
    const fs::path image_dir = root / "images";
    const fs::path gt_dir = root / "gt";
    if (!fs::is_directory(image_dir) || !fs::is_directory(gt_dir)) {
        throw DatasetError(root.string() + ": expected images/ and gt/ subdirectories");
    }
    DatasetManifest manifest;
    manifest.name = root.filename().empty() ? root.parent_path().filename().string() : root.filename().string();
    const auto images = index_by_stem(image_dir, {".png", ".jpg", ".jpeg"}, manifest.skipped);
    const auto truths = index_by_stem(gt_dir, {".png"}, manifest.skipped);
    return finish(join(images, truths, std::move(manifest)), root);
}

DatasetManifest load_manifest(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DatasetError(file.string() + ": cannot open manifest");
    const fs::path base = file.parent_path();
    DatasetManifest manifest;
    manifest.name = file.stem().string();
    std::map<std::string, int> seen;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        if (number == 1 && fields.size() == 2 && lower(fields[0]) == "image" && lower(fields[1]) == "gt") continue;
        if (fields.size() != 2) {
            manifest.skipped.push_back(file.string() + ":" + std::to_string(number) + ": expected two fields");
            continue;
        }
        fs::path image = fields[0];
        fs::path gt = fields[1];
        if (image.is_relative()) image = base / image;
        if (gt.is_relative()) gt = base / gt;
        if (!fs::is_regular_file(image)) {
            manifest.skipped.push_back(image.string() + ": missing image");
            continue;
        }
        if (!fs::is_regular_file(gt)) {
            manifest.skipped.push_back(gt.string() + ": missing ground truth");
            continue;
        }
        std::string id = image.stem().string();
        if (const int count = ++seen[id]; count > 1) id += "_" + std::to_string(count);
        manifest.entries.push_back(DatasetEntry{id, image, gt});
    }
    return finish(std::move(manifest), file);
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

DatasetManifest load_dataset(const fs::path& root, DatasetLayout layout) {
    return layout == DatasetLayout::PairedDirs ? load_paired(root) : load_manifest(root);
}

DatasetManifest pair_directories(const fs::path& left, const fs::path& right, const std::string& name) {
    if (!fs::is_directory(left)) throw DatasetError(left.string() + ": not a directory");
    if (!fs::is_directory(right)) throw DatasetError(right.string() + ": not a directory");
    DatasetManifest manifest;
    manifest.name = name;
    const auto a = index_by_stem(left, {".png", ".pgm", ".jpg", ".jpeg"}, manifest.skipped);
    const auto b = index_by_stem(right, {".png", ".pgm"}, manifest.skipped);
    return finish(join(a, b, std::move(manifest)), left);
}

}  // namespace hrsal
