#include "icsad/errors.hpp"

namespace icsad {

DegenerateWindow::DegenerateWindow(std::size_t index)
    : Error(ErrorKind::Detector,
            "window " + std::to_string(index) +
                " has (near-)zero standard deviation; choose a different window length"),
      index_(index) {}

}  // namespace icsad
