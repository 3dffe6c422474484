// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/ply_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "streamsplat/errors.hpp"

namespace streamsplat {

namespace {

constexpr std::array<const char*, 14> kFloatProps = {
    "x", "y", "z", "rot_w", "rot_x", "rot_y", "rot_z",
    "scale_x", "scale_y", "scale_z", "r", "g", "b", "opacity"};

constexpr size_t kRecordBytes = 14 * sizeof(float) + 1;

// Reads one header line, tracking the byte offset of its start.
std::string read_line(std::istream& in, size_t& offset) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("unexpected end of header", offset);
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

void export_field(const GaussianField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("export_field: cannot open " + path);

    std::ostringstream header;
    header << "ply\n"
           << "format binary_little_endian 1.0\n"
           << "element vertex " << field.size() << "\n";
    for (const char* name : kFloatProps) header << "property float " << name << "\n";
    header << "property uchar subgroup\n"
           << "end_header\n";
    out << header.str();

    std::vector<char> record(kRecordBytes);
    for (size_t i = 0; i < field.size(); ++i) {
        const auto& p = field.primitives[i];
        const float vals[14] = {p.mu.x,    p.mu.y,    p.mu.z,    p.rot.w,    p.rot.x,
                                p.rot.y,   p.rot.z,   p.scale.x, p.scale.y,  p.scale.z,
                                p.color.x, p.color.y, p.color.z, p.opacity};
        std::memcpy(record.data(), vals, sizeof(vals));
        record[sizeof(vals)] = static_cast<char>(field.subgroup[i]);
        out.write(record.data(), record.size());
    }
    if (!out) throw ArgumentError("export_field: write failed for " + path);
}

GaussianField import_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("import_field: cannot open " + path);

    size_t offset = 0;
    size_t line_start = offset;
    if (read_line(in, offset) != "ply") throw FormatError("missing ply magic", line_start);
    line_start = offset;
    if (read_line(in, offset) != "format binary_little_endian 1.0")
        throw FormatError("expected binary_little_endian 1.0 format", line_start);

    line_start = offset;
    std::string line = read_line(in, offset);
    size_t vertex_count = 0;
    {
        std::istringstream ls(line);
        std::string w0, w1;
        ls >> w0 >> w1 >> vertex_count;
        if (w0 != "element" || w1 != "vertex" || ls.fail())
            throw FormatError("expected 'element vertex <count>'", line_start);
    }

    size_t prop_idx = 0;
    while (true) {
        line_start = offset;
        line = read_line(in, offset);
        if (line == "end_header") break;
        std::istringstream ls(line);
        std::string kind, type, name;
        ls >> kind >> type >> name;
        if (kind == "comment") continue;
        if (kind != "property") throw FormatError("unexpected header line '" + line + "'", line_start);
        if (prop_idx < kFloatProps.size()) {
            if (type != "float" || name != kFloatProps[prop_idx])
                throw FormatError("unknown property '" + name + "'", line_start);
        } else if (prop_idx == kFloatProps.size()) {
            if (type != "uchar" || name != "subgroup")
                throw FormatError("unknown property '" + name + "'", line_start);
        } else {
            throw FormatError("unknown property '" + name + "'", line_start);
        }
        ++prop_idx;
    }
    if (prop_idx != kFloatProps.size() + 1)
        throw FormatError("vertex element is missing properties", line_start);

    GaussianField field;
    field.primitives.reserve(vertex_count);
    field.subgroup.reserve(vertex_count);

    std::vector<char> record(kRecordBytes);
    for (size_t i = 0; i < vertex_count; ++i) {
        in.read(record.data(), record.size());
        if (static_cast<size_t>(in.gcount()) != record.size())
            throw FormatError("truncated vertex payload", offset + in.gcount());
        offset += record.size();

        float vals[14];
        std::memcpy(vals, record.data(), sizeof(vals));
        const uint8_t sub = static_cast<uint8_t>(record[sizeof(vals)]);
        if (sub > 2) throw FormatError("invalid subgroup tag", offset - 1);

        GaussianPrimitive p;
        p.mu = {vals[0], vals[1], vals[2]};
        p.rot = {vals[3], vals[4], vals[5], vals[6]};
        p.scale = {vals[7], vals[8], vals[9]};
        p.color = {vals[10], vals[11], vals[12]};
        p.opacity = vals[13];
        p.validate();
        field.push_back(p, static_cast<Subgroup>(sub));
    }
    return field;
}

}  // namespace streamsplat
