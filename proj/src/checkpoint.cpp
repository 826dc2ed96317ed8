#include "deft/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "deft/error.hpp"

namespace deft {

namespace {

constexpr std::string_view kMagic = "deft-checkpoint";

static_assert(std::endian::native == std::endian::little,
              "params.bin is little-endian; add byte swapping for this target");

std::vector<std::string> split_spaces(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string field;
    while (in >> field) out.push_back(field);
    return out;
}

}  // namespace

const std::string* Manifest::find(const std::string& key) const {
    for (const auto& [k, v] : config)
        if (k == key) return &v;
    return nullptr;
}

std::string Manifest::get(const std::string& key) const {
    const std::string* v = find(key);
    if (v == nullptr)
        throw DataError("checkpoint manifest is missing config key '" + key +
                        "'");
    return *v;
}

void save_checkpoint(const std::filesystem::path& dir,
                     const std::vector<ParamRef>& params,
                     const Manifest& manifest) {
    std::filesystem::create_directories(dir);

    std::string text;
    text += std::string(kMagic) + " " + std::to_string(manifest.version) + "\n";
    text += "epoch " + std::to_string(manifest.epoch) + "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", manifest.dev_metric);
    text += std::string("dev_metric ") + buf + "\n";
    for (const auto& [k, v] : manifest.config)
        text += "config " + k + " " + v + "\n";
    for (const auto& p : params) {
        text += "param " + p.name;
        for (auto d : p.value->shape) text += " " + std::to_string(d);
        text += "\n";
    }

    std::ofstream mf(dir / "manifest.txt", std::ios::binary);
    if (!mf) throw IoError("cannot write '" + (dir / "manifest.txt").string() + "'");
    mf << text;
    if (!mf) throw IoError("write failed for manifest.txt");

    std::ofstream pf(dir / "params.bin", std::ios::binary);
    if (!pf) throw IoError("cannot write '" + (dir / "params.bin").string() + "'");
    for (const auto& p : params)
        pf.write(reinterpret_cast<const char*>(p.value->data()),
                 static_cast<std::streamsize>(p.value->size() * sizeof(float)));
    if (!pf) throw IoError("write failed for params.bin");
}

Manifest load_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.txt", std::ios::binary);
    if (!in)
        throw IoError("cannot read '" + (dir / "manifest.txt").string() + "'");
    Manifest m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_spaces(line);
        if (line_no == 1) {
            if (fields.size() != 2 || fields[0] != kMagic)
                throw ParseError("not a checkpoint manifest: '" + line + "'");
            m.version = std::stoi(fields[1]);
            continue;
        }
        if (fields[0] == "epoch" && fields.size() == 2) {
            m.epoch = std::stoi(fields[1]);
        } else if (fields[0] == "dev_metric" && fields.size() == 2) {
            m.dev_metric = std::stod(fields[1]);
        } else if (fields[0] == "config" && fields.size() >= 3) {
            std::string value = fields[2];
            for (std::size_t i = 3; i < fields.size(); ++i)
                value += " " + fields[i];
            m.config.emplace_back(fields[1], value);
        } else if (fields[0] == "param" && fields.size() >= 3) {
            std::vector<std::size_t> shape;
            for (std::size_t i = 2; i < fields.size(); ++i)
                shape.push_back(static_cast<std::size_t>(std::stoull(fields[i])));
            m.params.emplace_back(fields[1], std::move(shape));
        } else {
            throw ParseError("manifest line " + std::to_string(line_no) +
                             " not understood: '" + line + "'");
        }
    }
    return m;
}

void load_checkpoint(const std::filesystem::path& dir,
                     const std::vector<ParamRef>& params) {
    Manifest m = load_manifest(dir);
    if (m.params.size() != params.size())
        throw DataError("checkpoint has " + std::to_string(m.params.size()) +
                        " parameters, model expects " +
                        std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (m.params[i].first != params[i].name)
            throw DataError("checkpoint parameter " + std::to_string(i) +
                            " is '" + m.params[i].first + "', model expects '" +
                            params[i].name + "'");
        if (m.params[i].second != params[i].value->shape)
            throw DataError("checkpoint parameter '" + params[i].name +
                            "' has a different shape");
    }

    std::ifstream pf(dir / "params.bin", std::ios::binary);
    if (!pf)
        throw IoError("cannot read '" + (dir / "params.bin").string() + "'");
    for (const auto& p : params) {
        pf.read(reinterpret_cast<char*>(p.value->data()),
                static_cast<std::streamsize>(p.value->size() * sizeof(float)));
        if (pf.gcount() !=
            static_cast<std::streamsize>(p.value->size() * sizeof(float)))
            throw DataError("params.bin is shorter than the manifest declares");
    }
    char extra = 0;
    if (pf.read(&extra, 1), pf.gcount() != 0)
        throw DataError("params.bin is longer than the manifest declares");
}

}  // namespace deft
