#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "umed/space.hpp"

namespace umed {

// Matrix file format: optional '#' comment lines, a line holding n, then n
// lines of n whitespace-separated distances.
//
// Dendrogram file format: a nested expression, leaves `pN` (1-based), internal
// nodes `(child,child,...):height`, e.g. `((p1,p2):1,(p3,p4):2):4`.
//
// Parse failures throw FormatError carrying line and column.

DistanceMatrixSpace load_matrix(std::istream& in);
DistanceMatrixSpace load_matrix(const std::filesystem::path& path);
void save_matrix(const DistanceMatrixSpace& space, std::ostream& out);
void save_matrix(const DistanceMatrixSpace& space,
                 const std::filesystem::path& path);

DendrogramSpace load_dendrogram(std::istream& in);
DendrogramSpace load_dendrogram(const std::filesystem::path& path);
DendrogramSpace parse_dendrogram(const std::string& text);
void save_dendrogram(const DendrogramSpace& space, std::ostream& out);
void save_dendrogram(const DendrogramSpace& space,
                     const std::filesystem::path& path);

// Sniffs the format: a leading digit means a matrix, '(' or 'p' a dendrogram.
std::shared_ptr<const Space> load_space(const std::filesystem::path& path);

// Writes a dendrogram file when the path ends in .dend and the space is
// tree-backed; otherwise writes (materializing if needed) the matrix format.
void save_space(const Space& space, const std::filesystem::path& path);

}  // namespace umed
