// filled in once the caustics module lands
