#include "inrflow/vtk.hpp"

#include <fstream>

namespace inrflow {

void write_vtk(const Octree& tree, const ElementMarkers& markers, const FlowState& state,
               const std::string& path, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write: " + path);
  const int dim = tree.dim;
  const std::size_t n_nodes = tree.node_count();
  const std::size_t n_cells = tree.leaves.size();
  const int nn = 1 << dim;

  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n_nodes << " double\n";
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const Vec3& p = tree.node_pos[i];
    out << format_double(p.x) << ' ' << format_double(p.y) << ' '
        << format_double(dim == 3 ? p.z : 0.0) << '\n';
  }

  out << "CELLS " << n_cells << ' ' << n_cells * std::size_t(nn + 1) << '\n';
  for (std::size_t li = 0; li < n_cells; ++li) {
    const auto& ln = tree.leaf_nodes[li];
    out << nn;
    if (dim == 2) {
      // VTK_QUAD is counterclockwise; corner bits run x-fastest.
      out << ' ' << ln[0] << ' ' << ln[1] << ' ' << ln[3] << ' ' << ln[2];
    } else {
      out << ' ' << ln[0] << ' ' << ln[1] << ' ' << ln[3] << ' ' << ln[2] << ' ' << ln[4]
          << ' ' << ln[5] << ' ' << ln[7] << ' ' << ln[6];
    }
    out << '\n';
  }
  out << "CELL_TYPES " << n_cells << '\n';
  for (std::size_t li = 0; li < n_cells; ++li) out << (dim == 2 ? 9 : 12) << '\n';

  out << "POINT_DATA " << n_nodes << '\n';
  out << "VECTORS velocity double\n";
  for (std::size_t i = 0; i < n_nodes; ++i) {
    double u = state.velocity.empty() ? 0.0 : state.velocity[i * std::size_t(dim)];
    double v = state.velocity.empty() ? 0.0 : state.velocity[i * std::size_t(dim) + 1];
    double w = (dim == 3 && !state.velocity.empty())
                   ? state.velocity[i * std::size_t(dim) + 2]
                   : 0.0;
    out << format_double(u) << ' ' << format_double(v) << ' ' << format_double(w) << '\n';
  }
  out << "SCALARS pressure double\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < n_nodes; ++i)
    out << format_double(state.pressure.empty() ? 0.0 : state.pressure[i]) << '\n';

  out << "CELL_DATA " << n_cells << '\n';
  out << "SCALARS marker int\nLOOKUP_TABLE default\n";
  for (std::size_t li = 0; li < n_cells; ++li)
    out << int(markers.marker.empty() ? 0 : int(markers.marker[li])) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

}  // namespace inrflow
