namespace overtpoly {
}
