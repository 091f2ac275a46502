// filled in once the billiard module lands
