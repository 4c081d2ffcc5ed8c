#include "trap/io.hpp"

#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace trap::io {

void Reader::raw(void* p, size_t n) {
    if (pos_ + n > size_)
        throw std::runtime_error("truncated file at byte offset " + std::to_string(pos_));
    std::memcpy(p, data_ + pos_, n);
    pos_ += n;
}

std::vector<char> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    f.seekg(0, std::ios::end);
    std::vector<char> buf(static_cast<size_t>(f.tellg()));
    f.seekg(0);
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw std::runtime_error("cannot read '" + path + "'");
    return buf;
}

static void write_atomic_impl(const std::string& path, const char* data, size_t size) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write '" + tmp + "'");
        f.write(data, static_cast<std::streamsize>(size));
        if (!f) throw std::runtime_error("short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
}

void write_file_atomic(const std::string& path, const std::vector<char>& data) {
    write_atomic_impl(path, data.data(), data.size());
}

void write_file_atomic(const std::string& path, const std::string& data) {
    write_atomic_impl(path, data.data(), data.size());
}

}  // namespace trap::io
